/** Browser entry point: wires the app to the served page. */
import { boot } from "./main.js";

boot(document);

import { describe, expect, it } from "vitest";

import {
  buildDocument,
  codePointCompare,
  serializeDecisions,
  toRow,
  UNDECIDED,
} from "../src/decisions.js";
import type { Decision, DecisionRow } from "../src/decisions.js";

// Frozen output of the server-side serializer for the same three
// decisions (accept, new, reject by a "console" reviewer). The console
// must reproduce these bytes exactly, or round trips through the CLI
// would not be interchangeable.
const ORACLE =
  "#decisions\tv1\n" +
  "d-ab12\tambulation\taccept\twalking\tconsole\n" +
  "d-ab12\tquiet sitting\treject\t\tconsole\n" +
  "d-ab12\tsprint phase\tnew\trunning\tconsole\n";

function rows(): DecisionRow[] {
  // Deliberately out of order: the serializer owns the sorting.
  return [
    toRow("d-ab12", "sprint phase", { kind: "new", name: "running" }, "console"),
    toRow("d-ab12", "quiet sitting", { kind: "reject" }, "console"),
    toRow(
      "d-ab12",
      "ambulation",
      { kind: "accept", target: "walking" },
      "console",
    ),
  ];
}

describe("serializeDecisions", () => {
  it("emits a document byte-identical to the service format", () => {
    expect(serializeDecisions(rows())).toBe(ORACLE);
  });

  it("always ends with a newline and carries the version header", () => {
    const doc = serializeDecisions(rows());
    expect(doc.startsWith("#decisions\tv1\n")).toBe(true);
    expect(doc.endsWith("\n")).toBe(true);
    expect(doc.endsWith("\n\n")).toBe(false);
  });

  it("leaves the target field empty for rejects", () => {
    const doc = serializeDecisions([
      toRow("d1", "junk", { kind: "reject" }, "me"),
    ]);
    expect(doc).toBe("#decisions\tv1\nd1\tjunk\treject\t\tme\n");
  });

  it("refuses tabs and newlines inside fields", () => {
    expect(() =>
      serializeDecisions([
        toRow("d1", "a\tb", { kind: "reject" }, "me"),
      ]),
    ).toThrow(/tabs or newlines/);
    expect(() =>
      serializeDecisions([
        toRow("d1", "ok", { kind: "new", name: "x\ny" }, "me"),
      ]),
    ).toThrow(/tabs or newlines/);
  });
});

describe("codePointCompare", () => {
  it("sorts by code point, not UTF-16 unit", () => {
    // A UTF-16-unit sort would put the emoji (surrogate 0xD83D) before
    // the fullwidth bang (0xFF01); the server sorts by code point.
    const labels = ["😀", "z", "！"];
    labels.sort(codePointCompare);
    expect(labels).toEqual(["z", "！", "😀"]);
  });

  it("orders prefixes first", () => {
    expect(codePointCompare("walk", "walking")).toBeLessThan(0);
    expect(codePointCompare("walking", "walk")).toBeGreaterThan(0);
    expect(codePointCompare("walk", "walk")).toBe(0);
  });
});

describe("buildDocument", () => {
  it("throws while any label is undecided, naming the stragglers", () => {
    const states = new Map<string, Decision>([
      ["a", { kind: "reject" }],
      ["b", UNDECIDED],
      ["c", UNDECIDED],
    ]);
    expect(() => buildDocument("d1", states, "me")).toThrow(/b, c/);
  });

  it("builds the complete document once every label is decided", () => {
    const states = new Map<string, Decision>([
      ["sprint phase", { kind: "new", name: "running" }],
      ["quiet sitting", { kind: "reject" }],
      ["ambulation", { kind: "accept", target: "walking" }],
    ]);
    expect(buildDocument("d-ab12", states, "console")).toBe(ORACLE);
  });

  it("refuses undecided rows outright", () => {
    expect(() => toRow("d1", "x", UNDECIDED, "me")).toThrow(/undecided/);
  });
});

/** Console wiring: dataset picker, suggestion table, comparison chart,
 * decision submission. All data flows through the HTTP service; this
 * module never re-ranks or recomputes anything the server decided.
 */

import { Api, ApiError, MERGED_DATASET } from "./api.js";
import type { DatasetInfo, MergeReport } from "./api.js";
import type { Decision } from "./decisions.js";
import { undecidedLabels } from "./decisions.js";
import { ConsoleState } from "./state.js";
import { renderTable, highlightLabels } from "./table.js";
import { renderChart } from "./chart.js";
import type { Series } from "./chart.js";

const SOURCE_COLOR = "#c0392b";
const MERGED_COLOR = "#2471a3";

interface Elements {
  picker: HTMLSelectElement;
  loadBtn: HTMLButtonElement;
  banners: HTMLElement;
  table: HTMLElement;
  submitBtn: HTMLButtonElement;
  submitHint: HTMLElement;
  decidedBy: HTMLInputElement;
  report: HTMLElement;
  chartPanel: HTMLElement;
  chartTitle: HTMLElement;
  chartCanvas: HTMLCanvasElement;
  chartLegend: HTMLElement;
  rerollBtn: HTMLButtonElement;
}

function grab(doc: Document): Elements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const node = doc.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
  };
  return {
    picker: byId<HTMLSelectElement>("dataset-picker"),
    loadBtn: byId<HTMLButtonElement>("load-btn"),
    banners: byId<HTMLElement>("banners"),
    table: byId<HTMLElement>("table-root"),
    submitBtn: byId<HTMLButtonElement>("submit-btn"),
    submitHint: byId<HTMLElement>("submit-hint"),
    decidedBy: byId<HTMLInputElement>("decided-by"),
    report: byId<HTMLElement>("merge-report"),
    chartPanel: byId<HTMLElement>("chart-panel"),
    chartTitle: byId<HTMLElement>("chart-title"),
    chartCanvas: byId<HTMLCanvasElement>("chart-canvas"),
    chartLegend: byId<HTMLElement>("chart-legend"),
    rerollBtn: byId<HTMLButtonElement>("reroll-btn"),
  };
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.body.error}: ${err.body.detail}`;
  }
  return err instanceof Error ? err.message : String(err);
}

export class ConsoleApp {
  readonly state = new ConsoleState();
  private readonly els: Elements;
  private compare: { sourceLabel: string; candidateLabel: string } | null =
    null;
  private seed = 0;

  constructor(
    private readonly doc: Document,
    private readonly api: Api,
  ) {
    this.els = grab(doc);
    this.els.loadBtn.addEventListener("click", () => {
      void this.loadSuggestions();
    });
    this.els.submitBtn.addEventListener("click", () => {
      void this.submit();
    });
    this.els.rerollBtn.addEventListener("click", () => {
      this.seed += 1;
      void this.refreshChart();
    });
  }

  /** Transient, dismissible message. Never clears table or decisions. */
  banner(message: string, kind: "error" | "info" = "error"): void {
    const note = this.doc.createElement("div");
    note.className = `banner ${kind}`;
    const text = this.doc.createElement("span");
    text.textContent = message;
    note.appendChild(text);
    const dismiss = this.doc.createElement("button");
    dismiss.textContent = "dismiss";
    dismiss.addEventListener("click", () => note.remove());
    note.appendChild(dismiss);
    this.els.banners.appendChild(note);
  }

  async start(): Promise<void> {
    try {
      const listing = await this.api.listDatasets();
      this.fillPicker(listing.datasets);
    } catch (err) {
      this.banner(`could not list datasets: ${describeError(err)}`);
    }
  }

  private fillPicker(datasets: DatasetInfo[]): void {
    this.els.picker.textContent = "";
    for (const ds of datasets) {
      const opt = this.doc.createElement("option");
      opt.value = ds.dataset_id;
      opt.textContent = `${ds.name} (${ds.dataset_id.slice(0, 10)}, ${ds.stage})`;
      this.els.picker.appendChild(opt);
    }
  }

  async loadSuggestions(): Promise<void> {
    const datasetId = this.els.picker.value;
    if (!datasetId) {
      this.banner("pick a dataset first");
      return;
    }
    try {
      const payload = await this.api.suggestions(datasetId);
      this.state.setSuggestions(payload.dataset_id, payload.suggestions);
      this.compare = null;
      this.els.chartPanel.hidden = true;
      this.els.report.textContent = "";
      this.renderAll();
    } catch (err) {
      this.banner(`could not load suggestions: ${describeError(err)}`);
    }
  }

  renderAll(): void {
    renderTable(
      this.els.table,
      this.state.suggestions,
      (label) => this.state.decision(label),
      {
        onDecide: (label, decision) => this.onDecide(label, decision),
        onCompare: (label, candidate) => {
          void this.onCompare(label, candidate);
        },
      },
    );
    this.syncSubmit();
  }

  onDecide(sourceLabel: string, decision: Decision): void {
    this.state.decide(sourceLabel, decision);
    this.renderAll();
  }

  private syncSubmit(): void {
    const complete = this.state.complete;
    this.els.submitBtn.disabled = !complete;
    if (this.state.suggestions.length === 0) {
      this.els.submitHint.textContent = "load a dataset to begin";
    } else if (complete) {
      this.els.submitHint.textContent = "all labels decided";
    } else {
      const missing = this.state.undecided();
      this.els.submitHint.textContent = `undecided: ${missing.join(", ")}`;
    }
  }

  async onCompare(sourceLabel: string, candidateLabel: string): Promise<void> {
    this.compare = { sourceLabel, candidateLabel };
    await this.refreshChart();
  }

  /** Fetch both sides independently; one failing still plots the other. */
  async refreshChart(): Promise<void> {
    if (!this.compare || !this.state.datasetId) return;
    const { sourceLabel, candidateLabel } = this.compare;
    const series: Series[] = [];

    const sides = [
      {
        dataset: this.state.datasetId,
        label: sourceLabel,
        color: SOURCE_COLOR,
        tag: "source",
      },
      {
        dataset: MERGED_DATASET,
        label: candidateLabel,
        color: MERGED_COLOR,
        tag: "merged",
      },
    ];
    for (const side of sides) {
      try {
        const payload = await this.api.magnitude(
          side.dataset,
          side.label,
          this.seed,
        );
        series.push({
          label: `${side.tag}: ${payload.label} (${payload.trial_id})`,
          sampleRateHz: payload.sample_rate_hz,
          values: payload.magnitude,
          color: side.color,
        });
      } catch (err) {
        this.banner(
          `no ${side.tag} series for "${side.label}": ${describeError(err)}`,
        );
      }
    }

    this.els.chartPanel.hidden = false;
    this.els.chartTitle.textContent = `"${sourceLabel}" vs merged "${candidateLabel}" (seed ${this.seed})`;
    this.els.chartLegend.textContent = "";
    for (const s of series) {
      const item = this.doc.createElement("span");
      item.className = "legend-item";
      item.style.color = s.color;
      item.textContent = `■ ${s.label}`;
      this.els.chartLegend.appendChild(item);
    }
    renderChart(this.els.chartCanvas, series);
  }

  async submit(): Promise<void> {
    const datasetId = this.state.datasetId;
    if (!datasetId || !this.state.complete) return;
    const decidedBy = this.els.decidedBy.value.trim() || "console";
    let document: string;
    try {
      document = this.state.document(decidedBy);
    } catch (err) {
      this.banner(describeError(err));
      return;
    }
    try {
      const report = await this.api.applyMappings(datasetId, document);
      highlightLabels(this.els.table, []);
      this.showReport(report);
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        const missing = Array.isArray(err.body.missing)
          ? (err.body.missing as string[])
          : undecidedLabels(
              new Map(
                this.state.suggestions.map((s) => [
                  s.source_label,
                  this.state.decision(s.source_label),
                ]),
              ),
            );
        highlightLabels(this.els.table, missing);
        this.banner(`server rejected the decisions: ${describeError(err)}`);
      } else {
        this.banner(`submit failed: ${describeError(err)}`);
      }
    }
  }

  private showReport(report: MergeReport): void {
    const root = this.els.report;
    root.textContent = "";
    const heading = this.doc.createElement("h3");
    heading.textContent = "merge report";
    root.appendChild(heading);
    const list = this.doc.createElement("ul");
    const lines = [
      `merged trials: ${report.merged_trials}`,
      `rejected trials: ${report.rejected_trials}`,
      `vocabulary added: ${
        report.vocabulary_added.length
          ? report.vocabulary_added.join(", ")
          : "(none)"
      }`,
    ];
    for (const [label, stats] of Object.entries(report.per_label)) {
      const target = stats.target === null ? "rejected" : `-> ${stats.target}`;
      lines.push(
        `${label} ${target}: ${stats.merged} merged, ${stats.rejected} dropped`,
      );
    }
    for (const line of lines) {
      const item = this.doc.createElement("li");
      item.textContent = line;
      list.appendChild(item);
    }
    root.appendChild(list);
  }
}

export function boot(doc: Document, api: Api = new Api()): ConsoleApp {
  const app = new ConsoleApp(doc, api);
  void app.start();
  return app;
}

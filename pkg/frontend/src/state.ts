/** Console session state: the loaded suggestions plus one decision per
 * source label. Decisions change only through decide(), i.e. only on user
 * action; chart fetches and re-rolls never touch this object, which is
 * what keeps in-progress work safe across every non-navigation
 * interaction.
 */

import type { Suggestion } from "./api.js";
import {
  buildDocument,
  Decision,
  UNDECIDED,
  undecidedLabels,
} from "./decisions.js";

export class ConsoleState {
  datasetId: string | null = null;
  suggestions: Suggestion[] = [];
  private decisions = new Map<string, Decision>();

  /** Load a fresh suggestions payload. Decisions reset when the dataset
   * changes; reloading the same dataset keeps whatever was entered for
   * labels that are still present. */
  setSuggestions(datasetId: string, suggestions: Suggestion[]): void {
    const sameDataset = datasetId === this.datasetId;
    const previous = this.decisions;
    this.datasetId = datasetId;
    this.suggestions = suggestions;
    this.decisions = new Map();
    for (const s of suggestions) {
      const kept = sameDataset ? previous.get(s.source_label) : undefined;
      this.decisions.set(s.source_label, kept ?? UNDECIDED);
    }
  }

  decide(sourceLabel: string, decision: Decision): void {
    if (!this.decisions.has(sourceLabel)) {
      throw new Error(`unknown source label ${JSON.stringify(sourceLabel)}`);
    }
    this.decisions.set(sourceLabel, decision);
  }

  decision(sourceLabel: string): Decision {
    return this.decisions.get(sourceLabel) ?? UNDECIDED;
  }

  get complete(): boolean {
    return this.decisions.size > 0 && undecidedLabels(this.decisions).length === 0;
  }

  undecided(): string[] {
    return undecidedLabels(this.decisions);
  }

  /** The signed decisions document; throws while incomplete. */
  document(decidedBy: string): string {
    if (this.datasetId === null) throw new Error("no dataset loaded");
    return buildDocument(this.datasetId, this.decisions, decidedBy);
  }
}

/** Decision state and the decisions-document serializer.
 *
 * The emitted document must be byte-identical to the format the CLI reads
 * and writes: a "#decisions\tv1" header line, then one tab-separated row
 * per decision (dataset, source label, action, target, decided_by), rows
 * sorted by source label, every line newline-terminated. Reject rows carry
 * an empty target field.
 */

export type Decision =
  | { kind: "undecided" }
  | { kind: "accept"; target: string }
  | { kind: "new"; name: string }
  | { kind: "reject" };

export const UNDECIDED: Decision = { kind: "undecided" };

export const DECISIONS_HEADER = "#decisions\tv1";

export interface DecisionRow {
  datasetId: string;
  sourceLabel: string;
  action: "accept" | "new" | "reject";
  target: string | null;
  decidedBy: string;
}

/** Code-point string comparison, matching how the service sorts labels
 * (plain sort compares UTF-16 units, which disagrees for astral chars). */
export function codePointCompare(a: string, b: string): number {
  const ai = Array.from(a);
  const bi = Array.from(b);
  const n = Math.min(ai.length, bi.length);
  for (let i = 0; i < n; i++) {
    const ca = ai[i]!.codePointAt(0)!;
    const cb = bi[i]!.codePointAt(0)!;
    if (ca !== cb) return ca - cb;
  }
  return ai.length - bi.length;
}

function checkField(name: string, value: string): void {
  if (value.includes("\t") || value.includes("\n")) {
    throw new Error(`${name} may not contain tabs or newlines`);
  }
}

export function toRow(
  datasetId: string,
  sourceLabel: string,
  decision: Decision,
  decidedBy: string,
): DecisionRow {
  switch (decision.kind) {
    case "accept":
      return {
        datasetId,
        sourceLabel,
        action: "accept",
        target: decision.target,
        decidedBy,
      };
    case "new":
      return {
        datasetId,
        sourceLabel,
        action: "new",
        target: decision.name,
        decidedBy,
      };
    case "reject":
      return { datasetId, sourceLabel, action: "reject", target: null, decidedBy };
    case "undecided":
      throw new Error(`label ${JSON.stringify(sourceLabel)} is undecided`);
  }
}

export function serializeDecisions(rows: DecisionRow[]): string {
  const lines = [DECISIONS_HEADER];
  const ordered = [...rows].sort((a, b) =>
    codePointCompare(a.sourceLabel, b.sourceLabel),
  );
  for (const row of ordered) {
    const target = row.target ?? "";
    checkField("label", row.sourceLabel);
    checkField("target", target);
    checkField("decided_by", row.decidedBy);
    lines.push(
      [row.datasetId, row.sourceLabel, row.action, target, row.decidedBy].join(
        "\t",
      ),
    );
  }
  return lines.join("\n") + "\n";
}

/** Source labels still undecided, in the order given. */
export function undecidedLabels(
  states: ReadonlyMap<string, Decision>,
): string[] {
  const out: string[] = [];
  for (const [label, decision] of states) {
    if (decision.kind === "undecided") out.push(label);
  }
  return out;
}

/** Build the full document; throws if any label is undecided. */
export function buildDocument(
  datasetId: string,
  states: ReadonlyMap<string, Decision>,
  decidedBy: string,
): string {
  const missing = undecidedLabels(states);
  if (missing.length > 0) {
    throw new Error(`undecided labels: ${missing.join(", ")}`);
  }
  const rows: DecisionRow[] = [];
  for (const [label, decision] of states) {
    rows.push(toRow(datasetId, label, decision, decidedBy));
  }
  return serializeDecisions(rows);
}

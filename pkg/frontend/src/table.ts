/** Suggestion table rendering.
 *
 * One row group per source label, candidate rows in exactly the order the
 * server sent them (scores and ranking are never recomputed or re-sorted
 * client-side), the recommended candidate visually marked. Each group
 * carries its decision controls; control events call back into the
 * caller, which owns the ConsoleState.
 */

import type { Suggestion } from "./api.js";
import type { Decision } from "./decisions.js";

export interface TableHandlers {
  onDecide(sourceLabel: string, decision: Decision): void;
  onCompare(sourceLabel: string, candidateLabel: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function decisionSummary(decision: Decision): string {
  switch (decision.kind) {
    case "undecided":
      return "undecided";
    case "accept":
      return `accept as "${decision.target}"`;
    case "new":
      return `new label "${decision.name}"`;
    case "reject":
      return "rejected";
  }
}

function renderGroup(
  doc: Document,
  suggestion: Suggestion,
  decision: Decision,
  handlers: TableHandlers,
): HTMLTableSectionElement {
  const group = doc.createElement("tbody");
  group.className = "label-group";
  group.dataset.sourceLabel = suggestion.source_label;
  group.dataset.decision = decision.kind;

  const head = el(doc, "tr", "group-head");
  const name = el(doc, "td", "source-label", suggestion.source_label);
  name.colSpan = 2;
  head.appendChild(name);

  const status = el(doc, "td", "decision-state", decisionSummary(decision));
  status.colSpan = 2;
  head.appendChild(status);

  const controls = el(doc, "td", "group-controls");
  controls.colSpan = 2;
  const reject = el(doc, "button", "reject-btn", "reject");
  reject.addEventListener("click", () =>
    handlers.onDecide(suggestion.source_label, { kind: "reject" }),
  );
  controls.appendChild(reject);

  const newInput = el(doc, "input", "new-label-input");
  newInput.placeholder = "new label";
  newInput.value = decision.kind === "new" ? decision.name : "";
  const newBtn = el(doc, "button", "new-btn", "add as new");
  newBtn.addEventListener("click", () => {
    const value = newInput.value.trim();
    if (value) {
      handlers.onDecide(suggestion.source_label, { kind: "new", name: value });
    }
  });
  controls.appendChild(newInput);
  controls.appendChild(newBtn);
  head.appendChild(controls);
  group.appendChild(head);

  if (suggestion.candidates.length === 0) {
    const row = el(doc, "tr", "no-candidates");
    const cell = el(
      doc,
      "td",
      undefined,
      "no merged corpus to map onto yet; use a new label or reject",
    );
    cell.colSpan = 6;
    row.appendChild(cell);
    group.appendChild(row);
    return group;
  }

  for (const candidate of suggestion.candidates) {
    const row = el(doc, "tr", "candidate");
    row.dataset.candidateLabel = candidate.candidate_label;
    if (candidate.recommended) row.classList.add("recommended");
    const accepted =
      decision.kind === "accept" && decision.target === candidate.candidate_label;
    if (accepted) row.classList.add("accepted");

    row.appendChild(
      el(
        doc,
        "td",
        "candidate-label",
        candidate.candidate_label + (candidate.recommended ? " ★" : ""),
      ),
    );
    row.appendChild(el(doc, "td", "lssd", candidate.lssd.toFixed(3)));
    row.appendChild(el(doc, "td", "lss", String(candidate.lss)));
    row.appendChild(
      el(doc, "td", "lss-norm", candidate.lss_normalized.toFixed(3)),
    );

    const acceptCell = el(doc, "td", "accept-cell");
    const accept = el(
      doc,
      "button",
      "accept-btn",
      accepted ? "accepted" : "accept",
    );
    accept.addEventListener("click", () =>
      handlers.onDecide(suggestion.source_label, {
        kind: "accept",
        target: candidate.candidate_label,
      }),
    );
    acceptCell.appendChild(accept);
    row.appendChild(acceptCell);

    const compareCell = el(doc, "td", "compare-cell");
    const compare = el(doc, "button", "compare-btn", "compare");
    compare.addEventListener("click", () =>
      handlers.onCompare(suggestion.source_label, candidate.candidate_label),
    );
    compareCell.appendChild(compare);
    row.appendChild(compareCell);

    group.appendChild(row);
  }
  return group;
}

/** Render the whole table into `container`, replacing previous content. */
export function renderTable(
  container: HTMLElement,
  suggestions: Suggestion[],
  decisionOf: (sourceLabel: string) => Decision,
  handlers: TableHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";

  if (suggestions.length === 0) {
    container.appendChild(
      el(doc, "p", "empty-state", "nothing to map: no source labels found"),
    );
    return;
  }

  const table = el(doc, "table", "suggestions");
  const thead = doc.createElement("thead");
  const header = doc.createElement("tr");
  for (const title of ["candidate", "lssd", "lss", "lss/len", "", ""]) {
    header.appendChild(el(doc, "th", undefined, title));
  }
  thead.appendChild(header);
  table.appendChild(thead);

  for (const suggestion of suggestions) {
    table.appendChild(
      renderGroup(doc, suggestion, decisionOf(suggestion.source_label), handlers),
    );
  }
  container.appendChild(table);
}

/** Mark the named groups as offending (server-side validation feedback). */
export function highlightLabels(
  container: HTMLElement,
  labels: string[],
): void {
  const wanted = new Set(labels);
  for (const group of Array.from(
    container.querySelectorAll<HTMLElement>("tbody.label-group"),
  )) {
    group.classList.toggle(
      "offending",
      wanted.has(group.dataset.sourceLabel ?? ""),
    );
  }
}

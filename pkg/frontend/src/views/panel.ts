/** Panel overview: every subject with their latest state and open alerts. */

import { SubjectSummary } from "../api.js";
import { clear, el, fmt } from "../dom.js";

export function renderPanel(container: HTMLElement, subjects: SubjectSummary[],
                            onSelect: (subject: string) => void): void {
  clear(container);
  container.append(el("h2", {}, "Panel"));
  if (!subjects.length) {
    container.append(el("p", { class: "empty-state" }, "No subjects yet."));
    return;
  }
  const table = el("table", { class: "panel" });
  table.append(el("tr", {},
                  el("th", {}, "subject"), el("th", {}, "days"),
                  el("th", {}, "valence"), el("th", {}, "stress"),
                  el("th", {}, "open alerts")));
  for (const s of subjects) {
    const row = el("tr", { class: "panel-row", "data-subject": s.subject },
                   el("td", {}, s.subject),
                   el("td", {}, String(s.days)),
                   el("td", {}, fmt(s.latest_state?.dims["emotional_valence"], 2)),
                   el("td", {}, fmt(s.latest_state?.dims["biological_stress"], 2)),
                   el("td", {}, String(s.open_alerts)));
    row.addEventListener("click", () => onSelect(s.subject));
    table.append(row);
  }
  container.append(table);
}

/**
 * Goal consensus editor.  The buttons submit actions as-is; the engine's
 * state machine is the single source of legality, and a rejected transition
 * (409) surfaces as an inline validation error.
 */

import { ApiError, GoalJson } from "../api.js";
import { clear, el } from "../dom.js";

const STATUSES = ["proposed", "diverged", "revised", "consensus", "achieved",
                  "abandoned"];
const ACTIONS: { action: string; label: string; providerOnly: boolean }[] = [
  { action: "provider_agree", label: "Agree (consensus)", providerOnly: true },
  { action: "provider_diverge", label: "Diverge", providerOnly: true },
  { action: "revise", label: "Revise target", providerOnly: false },
  { action: "mark_achieved", label: "Mark achieved", providerOnly: false },
  { action: "abandon", label: "Abandon", providerOnly: false },
];

export interface GoalCallbacks {
  onAction: (body: Record<string, unknown>) => Promise<void>;
}

export function renderGoalEditor(container: HTMLElement, goal: GoalJson | null,
                                 targets: string[],
                                 callbacks: GoalCallbacks): void {
  clear(container);
  container.append(el("h2", {}, "Goal consensus"));
  const errorBox = el("div", { class: "error", role: "alert" });

  const submit = async (body: Record<string, unknown>) => {
    errorBox.textContent = "";
    try {
      await callbacks.onAction(body);
    } catch (err) {
      errorBox.textContent = err instanceof ApiError
        ? `Rejected (${err.status}): ${err.detail}`
        : String(err);
    }
  };

  if (goal === null) {
    const select = el("select", { class: "goal-target" });
    for (const t of targets) select.append(el("option", { value: t }, t));
    const create = el("button", { class: "goal-create" }, "Propose goal");
    create.addEventListener("click", () =>
      submit({ create: true, target: select.value, proposed_by: "provider" }));
    container.append(el("p", {}, "No goal on record."), select, create, errorBox);
    return;
  }

  const machine = el("ol", { class: "status-machine" });
  for (const status of STATUSES) {
    machine.append(el("li", {
      class: status === goal.status ? "status current" : "status",
      "data-status": status,
    }, status));
  }
  container.append(machine);
  container.append(el("p", { class: "goal-target-label" },
                      `Target: ${typeof goal.target === "string"
                        ? goal.target : JSON.stringify(goal.target)} · ` +
                      `proposed by ${goal.proposed_by} · v${goal.version}`));

  const noteInput = el("input", { type: "text", class: "goal-note",
                                  placeholder: "note" });
  const buttons = el("div", { class: "goal-actions" });
  for (const spec of ACTIONS) {
    const btn = el("button", { class: `goal-action-${spec.action}`,
                               "data-action": spec.action }, spec.label);
    btn.addEventListener("click", () =>
      submit({ action: spec.action, note: noteInput.value,
               version: goal.version }));
    buttons.append(btn);
  }
  container.append(noteInput, buttons, errorBox);

  const history = el("ul", { class: "goal-history" });
  for (const [ts, status, note] of goal.history) {
    history.append(el("li", {},
                      `${ts ? new Date(ts).toISOString() : "—"} → ${status}` +
                      (note ? ` (${note})` : "")));
  }
  container.append(history);
}

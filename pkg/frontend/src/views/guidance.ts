/**
 * Guidance composer: pick a goal region, preview the planned route live
 * (dry-run, nothing persisted), then commit.  The predicted trajectory is the
 * service's own cell sequence rendered over the state-space projection.
 */

import { ApiError, PlanJson, StateResponse } from "../api.js";
import { clear, el, svg } from "../dom.js";

const SIZE = 320;

export interface GuidanceCallbacks {
  onPreview: () => Promise<PlanJson>;
  onCommit: () => Promise<PlanJson>;
}

export function renderPlanSteps(container: HTMLElement, plan: PlanJson,
                                heading: string): void {
  const box = el("div", { class: "plan-box" });
  box.append(el("h3", {}, heading));
  box.append(el("p", { class: "plan-cost" },
                `${plan.trajectory.length - 1} week(s), total cost ${plan.total_cost}`));
  const table = el("table", { class: "plan-steps" });
  table.append(el("tr", {}, el("th", {}, "intervention"),
               el("th", {}, "start week"), el("th", {}, "weeks")));
  for (const step of plan.steps) {
    table.append(el("tr", { "data-step": step.intervention_id },
                    el("td", {}, step.intervention_id),
                    el("td", {}, String(step.start_week)),
                    el("td", {}, String(step.weeks))));
  }
  box.append(table);
  container.append(box);
}

export function renderTrajectoryOverlay(plot: SVGElement, plan: PlanJson,
                                        state: StateResponse,
                                        dimX: string, dimY: string): void {
  const dims = state.space.dimensions;
  const g = state.space.grid_resolution;
  const ix = dims.indexOf(dimX);
  const iy = dims.indexOf(dimY);
  if (ix < 0 || iy < 0) return;
  const points = plan.trajectory
    .map((cell) => {
      const x = ((cell[ix] + 0.5) / g) * SIZE;
      const y = SIZE - ((cell[iy] + 0.5) / g) * SIZE;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  plot.append(svg("polyline", { points, fill: "none", stroke: "#2255cc",
                                "stroke-width": 2, "stroke-dasharray": "6 3",
                                class: "plan-trajectory" }));
}

export function renderGuidanceComposer(container: HTMLElement,
                                       committed: PlanJson | null,
                                       callbacks: GuidanceCallbacks): void {
  clear(container);
  container.append(el("h2", {}, "Guidance composer"));
  const errorBox = el("div", { class: "error", role: "alert" });
  const previewBox = el("div", { class: "preview-area" });
  const committedBox = el("div", { class: "committed-area" });

  const run = async (fn: () => Promise<PlanJson>, target: HTMLElement,
                     heading: string) => {
    errorBox.textContent = "";
    try {
      const plan = await fn();
      clear(target);
      renderPlanSteps(target, plan, heading);
      return plan;
    } catch (err) {
      errorBox.textContent = err instanceof ApiError
        ? `Planning failed (${err.status}): ${err.detail}`
        : String(err);
      return null;
    }
  };

  const previewBtn = el("button", { class: "plan-preview" }, "Preview route");
  previewBtn.addEventListener("click", () =>
    run(callbacks.onPreview, previewBox, "Dry-run preview"));
  const commitBtn = el("button", { class: "plan-commit" }, "Commit plan");
  commitBtn.addEventListener("click", () =>
    run(callbacks.onCommit, committedBox, "Committed plan"));

  container.append(el("div", { class: "guidance-actions" }, previewBtn, commitBtn),
                   errorBox, previewBox, committedBox);
  if (committed) {
    renderPlanSteps(committedBox, committed, "Committed plan");
  }
}

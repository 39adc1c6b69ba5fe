/**
 * Guidance composer contract: the dry-run preview renders exactly the plan
 * the service returned (steps and predicted trajectory), nothing is
 * persisted until commit, and planner rejections surface inline.
 */

import { describe, expect, it } from "vitest";
import { ApiClient, PlanJson, StateResponse } from "../src/api.js";
import { renderGuidanceComposer, renderPlanSteps,
         renderTrajectoryOverlay } from "../src/views/guidance.js";
import { renderStateSpace } from "../src/views/statespace.js";
import { fixture, mount, scriptedFetch } from "./helpers.js";

const preview = fixture<PlanJson>("plan_preview");
const committed = fixture<PlanJson>("plan_committed");
const state = fixture<StateResponse>("state");

async function settle() {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

describe("guidance composer", () => {
  it("dry-run preview renders the service's plan verbatim", async () => {
    const { fetch, calls } = scriptedFetch({
      "POST /subjects/s01/guidance": (call) => {
        const body = call.body as Record<string, unknown>;
        return body.dry_run ? preview : committed;
      },
    });
    const api = new ApiClient("", "provider-token", fetch);
    const root = mount();
    renderGuidanceComposer(root, null, {
      onPreview: () => api.guidance("s01", { dry_run: true }),
      onCommit: () => api.guidance("s01", {}),
    });
    (root.querySelector(".plan-preview") as HTMLButtonElement).click();
    await settle();

    expect((calls[0].body as Record<string, unknown>).dry_run).toBe(true);
    const rows = [...root.querySelectorAll(".preview-area [data-step]")];
    expect(rows.map((r) => r.getAttribute("data-step")))
      .toEqual(preview.steps.map((s) => s.intervention_id));
    expect(root.querySelector(".preview-area .plan-cost")!.textContent)
      .toContain(String(preview.total_cost));
    // nothing committed yet
    expect(root.querySelector(".committed-area .plan-box")).toBeNull();

    (root.querySelector(".plan-commit") as HTMLButtonElement).click();
    await settle();
    expect(calls).toHaveLength(2);
    expect((calls[1].body as Record<string, unknown>).dry_run).toBeUndefined();
    expect(root.querySelector(".committed-area .plan-box")).not.toBeNull();
  });

  it("overlays the predicted trajectory on the state-space view", () => {
    const root = mount();
    renderStateSpace(root, state, state.history ?? [],
                     "emotional_valence", "biological_stress");
    const plot = root.querySelector("svg.state-plot") as unknown as SVGElement;
    renderTrajectoryOverlay(plot, preview, state,
                            "emotional_valence", "biological_stress");
    const overlay = plot.querySelector(".plan-trajectory")!;
    const points = (overlay.getAttribute("points") ?? "").split(" ");
    expect(points.length).toBe(preview.trajectory.length);
    // first vertex equals the service's starting cell center, scaled
    const dims = state.space.dimensions;
    const g = state.space.grid_resolution;
    const ix = dims.indexOf("emotional_valence");
    const x0 = ((preview.trajectory[0][ix] + 0.5) / g) * 320;
    expect(Number(points[0].split(",")[0])).toBeCloseTo(x0, 1);
  });

  it("surfaces planner rejections inline", async () => {
    const { fetch } = scriptedFetch({
      "POST /subjects/s01/guidance": {
        status: 409, body: { detail: "goal status is 'proposed', need consensus" },
      },
    });
    const api = new ApiClient("", "provider-token", fetch);
    const root = mount();
    renderGuidanceComposer(root, null, {
      onPreview: () => api.guidance("s01", { dry_run: true }),
      onCommit: () => api.guidance("s01", {}),
    });
    (root.querySelector(".plan-preview") as HTMLButtonElement).click();
    await settle();
    expect(root.querySelector(".error")!.textContent).toContain("need consensus");
  });

  it("renders committed plans on load", () => {
    const root = mount();
    renderGuidanceComposer(root, committed, {
      onPreview: () => Promise.reject(new Error("unused")),
      onCommit: () => Promise.reject(new Error("unused")),
    });
    const rows = [...root.querySelectorAll(".committed-area [data-step]")];
    expect(rows.length).toBe(committed.steps.length);
  });

  it("step table mirrors the wire format", () => {
    const root = mount();
    renderPlanSteps(root, preview, "x");
    const first = root.querySelector("[data-step]")!;
    const cells = [...first.querySelectorAll("td")].map((c) => c.textContent);
    expect(cells).toEqual([preview.steps[0].intervention_id,
                           String(preview.steps[0].start_week),
                           String(preview.steps[0].weeks)]);
  });
});

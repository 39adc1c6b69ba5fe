/**
 * Single-page wiring: hash routes #/panel, #/subjects/{id}, #/alerts.
 * All state is server responses plus the current route.
 */

import { ApiClient, PlanJson, StateResponse, StateVectorJson, TimelineResponse } from "./api.js";
import { clear, el } from "./dom.js";
import { renderAlertInbox } from "./views/alerts.js";
import { renderGoalEditor } from "./views/goals.js";
import { renderGuidanceComposer, renderTrajectoryOverlay } from "./views/guidance.js";
import { renderPanel } from "./views/panel.js";
import { renderStateSpace } from "./views/statespace.js";
import { renderTimeline } from "./views/timeline.js";

export class App {
  private dimX = "emotional_valence";
  private dimY = "emotional_arousal";

  constructor(private api: ApiClient, private root: HTMLElement) {}

  async route(hash: string): Promise<void> {
    const subjectMatch = hash.match(/^#\/subjects\/([A-Za-z0-9_-]+)/);
    if (subjectMatch) {
      await this.subjectPage(subjectMatch[1]);
    } else if (hash.startsWith("#/alerts")) {
      await this.alertsPage();
    } else {
      await this.panelPage();
    }
  }

  start(): void {
    window.addEventListener("hashchange", () => this.route(location.hash));
    void this.route(location.hash);
  }

  private section(cls: string): HTMLElement {
    const node = el("div", { class: `section ${cls}` });
    this.root.append(node);
    return node;
  }

  async panelPage(): Promise<void> {
    clear(this.root);
    const subjects = await this.api.subjects();
    renderPanel(this.section("panel-section"), subjects, (subject) => {
      location.hash = `#/subjects/${subject}`;
    });
  }

  async alertsPage(): Promise<void> {
    clear(this.root);
    const alerts = await this.api.alerts("open");
    renderAlertInbox(this.section("alerts-section"), alerts, {
      onAck: async (id) => {
        await this.api.ackAlert(id);
        await this.alertsPage();
      },
    });
  }

  async subjectPage(subject: string, fromMs?: number, toMs?: number): Promise<void> {
    clear(this.root);
    let timeline: TimelineResponse;
    let state: StateResponse | null = null;
    try {
      timeline = await this.api.timeline(subject, fromMs, toMs);
    } catch {
      this.root.append(el("p", { class: "empty-state" },
                          `Nothing recorded for ${subject}.`));
      return;
    }
    try {
      state = await this.api.state(subject);
    } catch {
      state = null;
    }

    renderTimeline(this.section("timeline-section"), timeline, {
      onRange: (f, t) => void this.subjectPage(subject, f, t),
    });

    if (state) {
      const history = (state.history ?? []) as StateVectorJson[];
      const spaceBox = this.section("space-section");
      renderStateSpace(spaceBox, state, history, this.dimX, this.dimY, {
        onDimPair: (x, y) => {
          this.dimX = x;
          this.dimY = y;
          void this.subjectPage(subject, fromMs, toMs);
        },
      });

      const goalBox = this.section("goal-section");
      const refreshGoal = async () => {
        let goal = null;
        try {
          goal = await this.api.goal(subject);
        } catch {
          goal = null;
        }
        renderGoalEditor(goalBox, goal,
                         state!.space.regions.map((r) => r.label), {
          onAction: async (body) => {
            await this.api.postGoal(subject, body);
            await refreshGoal();
          },
        });
      };
      await refreshGoal();

      let committed: PlanJson | null = null;
      try {
        committed = await this.api.plan(subject);
      } catch {
        committed = null;
      }
      renderGuidanceComposer(this.section("guidance-section"), committed, {
        onPreview: async () => {
          const plan = await this.api.guidance(subject, { dry_run: true });
          const plot = spaceBox.querySelector("svg.state-plot");
          if (plot) {
            renderTrajectoryOverlay(plot as unknown as SVGElement, plan, state!,
                                    this.dimX, this.dimY);
          }
          return plan;
        },
        onCommit: () => this.api.guidance(subject, {}),
      });
    }
  }
}

declare global {
  interface Window {
    MHN_API_BASE?: string;
    MHN_TOKEN?: string;
  }
}

export function boot(): void {
  const api = new ApiClient(window.MHN_API_BASE ?? "",
                            window.MHN_TOKEN ?? "provider-token");
  const root = document.getElementById("app");
  if (root) new App(api, root).start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}

/**
 * Typed client over the engine's HTTP API.
 *
 * The dashboard performs no domain computation: every number it renders is a
 * field of one of these response shapes, verbatim from the service.
 */

export interface SubjectSummary {
  subject: string;
  days: number;
  latest_state: StateVectorJson | null;
  open_alerts: number;
}

export interface DailyRow {
  day: string;
  mean_positive: number | null;
  mean_negative: number | null;
  response_rate: number;
  rmssd: number | null;
  rmssd_rest: number | null;
  hr: number | null;
  hr_rest: number | null;
  lf_hf: number | null;
  respiration: number | null;
  stress: number | null;
  arousal_frac: number | null;
  sleep_score: number | null;
  steps: number | null;
  home_minutes: number | null;
  unknown_minutes: number | null;
  comm_minutes: number;
  coverage: number;
  physio_windows: number;
}

export interface EventJson {
  subject: string;
  label: string;
  start_ms: number;
  end_ms: number;
  attributes: string[];
  source: string;
  confidence: number;
}

export interface DailySummaryJson {
  subject: string;
  day: string;
  minutes: Record<string, number>;
  unknown_minutes: number;
  coverage: number;
}

export interface TimelineResponse {
  subject: string;
  daily: DailyRow[];
  summaries?: DailySummaryJson[];
  events: EventJson[];
}

export interface StateVectorJson {
  dims: Record<string, number>;
  confidence: Record<string, number>;
  timestamp: number;
  day?: string;
  regions?: string[];
}

export interface RegionJson {
  label: string;
  kind: "healthy" | "disorder" | "neutral";
  bounds: Record<string, [number, number]>;
}

export interface StateSpaceJson {
  dimensions: string[];
  grid_resolution: number;
  regions: RegionJson[];
}

export interface ScreenJson {
  score: number;
  band: string;
  window_days: number;
  contributors: Record<string, number>;
}

export interface StateResponse extends StateVectorJson {
  screen: ScreenJson | null;
  regime: [string, number, number][] | null;
  space: StateSpaceJson;
  history?: StateVectorJson[];
}

export interface GoalJson {
  subject: string;
  target: string | Record<string, [number, number]>;
  proposed_by: string;
  status: string;
  history: [number, string, string][];
  version: number;
}

export interface PlanStep {
  intervention_id: string;
  start_week: number;
  weeks: number;
}

export interface PlanJson {
  subject: string;
  goal_target: string | Record<string, [number, number]>;
  steps: PlanStep[];
  trajectory: number[][];
  total_cost: number;
  created_by: string;
  created_at: number;
  active: boolean;
  version: number;
}

export interface AlertJson {
  id: string;
  subject: string;
  kind: string;
  created_at: number;
  payload: Record<string, unknown>;
  state: "open" | "acknowledged";
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private token: string = "provider-token",
    private fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      ...init,
      headers: {
        Authorization: `Bearer ${this.token}`,
        "Content-Type": "application/json",
        ...(init?.headers ?? {}),
      },
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  subjects(): Promise<SubjectSummary[]> {
    return this.request("/subjects");
  }

  timeline(subject: string, fromMs?: number, toMs?: number): Promise<TimelineResponse> {
    const params = new URLSearchParams();
    if (fromMs !== undefined) params.set("from", String(fromMs));
    if (toMs !== undefined) params.set("to", String(toMs));
    const qs = params.toString();
    return this.request(`/subjects/${subject}/timeline${qs ? "?" + qs : ""}`);
  }

  state(subject: string): Promise<StateResponse> {
    return this.request(`/subjects/${subject}/state`);
  }

  goal(subject: string): Promise<GoalJson> {
    return this.request(`/subjects/${subject}/goal`);
  }

  postGoal(subject: string, body: Record<string, unknown>): Promise<GoalJson> {
    return this.request(`/subjects/${subject}/goals`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  plan(subject: string): Promise<PlanJson> {
    return this.request(`/subjects/${subject}/plan`);
  }

  guidance(subject: string, body: Record<string, unknown>): Promise<PlanJson> {
    return this.request(`/subjects/${subject}/guidance`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  alerts(state: string = "open"): Promise<AlertJson[]> {
    return this.request(`/alerts?state=${state}`);
  }

  ackAlert(id: string): Promise<AlertJson> {
    return this.request(`/alerts/${id}/ack`, { method: "POST" });
  }
}

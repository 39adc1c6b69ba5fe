/**
 * Stacked daily charts over a selectable range: mood (negative in blue,
 * positive in yellow), resting and day heart rate, resting and day variability,
 * sleep score, step counts, and home/unknown minutes.  Values are rendered
 * exactly as the timeline endpoint returned them.
 */

import { DailyRow, TimelineResponse } from "../api.js";
import { clear, el, svg } from "../dom.js";

export interface SeriesSpec {
  key: string;
  title: string;
  lines: { field: keyof DailyRow; color: string; label: string }[];
}

export const TIMELINE_SERIES: SeriesSpec[] = [
  {
    key: "mood", title: "Mood",
    lines: [
      { field: "mean_negative", color: "#4477cc", label: "negative" },
      { field: "mean_positive", color: "#ddaa33", label: "positive" },
    ],
  },
  { key: "resting_bpm", title: "Resting BPM",
    lines: [{ field: "hr_rest", color: "#cc5555", label: "resting bpm" }] },
  { key: "resting_rmssd", title: "Resting RMSSD",
    lines: [{ field: "rmssd_rest", color: "#55aa77", label: "resting rmssd" }] },
  { key: "day_bpm", title: "Day BPM",
    lines: [{ field: "hr", color: "#cc5555", label: "day bpm" }] },
  { key: "day_rmssd", title: "Day RMSSD",
    lines: [{ field: "rmssd", color: "#55aa77", label: "day rmssd" }] },
  { key: "sleep_score", title: "Sleep Score",
    lines: [{ field: "sleep_score", color: "#7766cc", label: "sleep score" }] },
  { key: "steps", title: "Step Counts",
    lines: [{ field: "steps", color: "#888833", label: "steps" }] },
  {
    key: "home", title: "Home / Unknown Minutes",
    lines: [
      { field: "home_minutes", color: "#338899", label: "home" },
      { field: "unknown_minutes", color: "#999999", label: "unknown" },
    ],
  },
];

const W = 600;
const H = 80;
const PAD = 4;

function polylineSegments(rows: DailyRow[], field: keyof DailyRow): string[] {
  const values = rows.map((r) => r[field] as number | null);
  const present = values.filter((v): v is number => v !== null && isFinite(v));
  if (!present.length) return [];
  const lo = Math.min(...present);
  const hi = Math.max(...present);
  const span = hi - lo || 1;
  const step = rows.length > 1 ? W / (rows.length - 1) : 0;
  const segments: string[] = [];
  let current: string[] = [];
  values.forEach((v, i) => {
    if (v === null || !isFinite(v)) {
      if (current.length) segments.push(current.join(" "));
      current = [];
      return;
    }
    const x = (i * step).toFixed(1);
    const y = (H - PAD - ((v - lo) / span) * (H - 2 * PAD)).toFixed(1);
    current.push(`${x},${y}`);
  });
  if (current.length) segments.push(current.join(" "));
  return segments;
}

export interface TimelineCallbacks {
  onRange?: (fromMs: number | undefined, toMs: number | undefined) => void;
}

export function renderTimeline(container: HTMLElement, timeline: TimelineResponse,
                               callbacks: TimelineCallbacks = {}): void {
  clear(container);
  container.append(el("h2", {}, `Timeline — ${timeline.subject}`));

  const fromInput = el("input", { type: "date", class: "range-from" });
  const toInput = el("input", { type: "date", class: "range-to" });
  const applyBtn = el("button", { class: "range-apply" }, "Apply range");
  applyBtn.addEventListener("click", () => {
    const fromMs = fromInput.value ? Date.parse(fromInput.value + "T00:00:00Z") : undefined;
    const toMs = toInput.value ? Date.parse(toInput.value + "T00:00:00Z") + 86_400_000 : undefined;
    callbacks.onRange?.(fromMs, toMs);
  });
  container.append(el("div", { class: "range-picker" }, fromInput, toInput, applyBtn));

  if (!timeline.daily.length) {
    container.append(el("p", { class: "empty-state" },
                        "No data recorded for this subject yet."));
    return;
  }

  for (const series of TIMELINE_SERIES) {
    const chart = el("div", { class: "chart", "data-series": series.key });
    chart.append(el("h3", {}, series.title));
    const plot = svg("svg", { viewBox: `0 0 ${W} ${H}`, width: W, height: H,
                              role: "img" });
    for (const line of series.lines) {
      for (const points of polylineSegments(timeline.daily, line.field)) {
        plot.append(svg("polyline", {
          points, fill: "none", stroke: line.color, "stroke-width": 1.5,
          "data-line": String(line.field),
        }));
      }
    }
    chart.append(plot);
    const legend = series.lines
      .map((l) => l.label)
      .join(" · ");
    chart.append(el("div", { class: "legend" }, legend));
    container.append(chart);
  }
}

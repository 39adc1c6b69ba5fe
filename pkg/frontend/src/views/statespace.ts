/**
 * Two-dimensional projection of the state space: region boxes straight from
 * the space definition, the state trajectory for the selected range, and a
 * dimension-pair selector defaulting to the emotional factors.
 */

import { StateResponse, StateVectorJson } from "../api.js";
import { clear, el, svg } from "../dom.js";

const SIZE = 320;

export interface StateSpaceCallbacks {
  onDimPair?: (x: string, y: string) => void;
  onPointClick?: (state: StateVectorJson) => void;
}

function sx(v: number): number {
  return v * SIZE;
}

function sy(v: number): number {
  return SIZE - v * SIZE;
}

export function renderStateSpace(container: HTMLElement, state: StateResponse,
                                 history: StateVectorJson[],
                                 dimX = "emotional_valence",
                                 dimY = "emotional_arousal",
                                 callbacks: StateSpaceCallbacks = {}): void {
  clear(container);
  container.append(el("h2", {}, "State space"));

  const options = state.space.dimensions;
  const selX = el("select", { class: "dim-x" });
  const selY = el("select", { class: "dim-y" });
  for (const dim of options) {
    selX.append(el("option", { value: dim, selected: dim === dimX }, dim));
    selY.append(el("option", { value: dim, selected: dim === dimY }, dim));
  }
  const onChange = () => callbacks.onDimPair?.(selX.value, selY.value);
  selX.addEventListener("change", onChange);
  selY.addEventListener("change", onChange);
  container.append(el("div", { class: "dim-picker" }, selX, " × ", selY));

  const plot = svg("svg", {
    viewBox: `0 0 ${SIZE} ${SIZE}`, width: SIZE, height: SIZE,
    class: "state-plot",
  });

  for (const region of state.space.regions) {
    const bx = region.bounds[dimX] ?? [0, 1];
    const by = region.bounds[dimY] ?? [0, 1];
    const rect = svg("rect", {
      x: sx(bx[0]), y: sy(by[1]),
      width: sx(bx[1]) - sx(bx[0]), height: sy(by[0]) - sy(by[1]),
      class: `region region-${region.kind}`, "data-region": region.label,
      "fill-opacity": 0.15,
      fill: region.kind === "disorder" ? "#cc3333" :
        region.kind === "healthy" ? "#33aa55" : "#8888aa",
      stroke: "#555555",
    });
    rect.append(svg("title", {}, `${region.label} (${region.kind})`));
    plot.append(rect);
  }

  const located = history.filter(
    (s) => dimX in s.dims && dimY in s.dims);
  if (located.length > 1) {
    const points = located
      .map((s) => `${sx(s.dims[dimX]).toFixed(1)},${sy(s.dims[dimY]).toFixed(1)}`)
      .join(" ");
    plot.append(svg("polyline", { points, fill: "none", stroke: "#444444",
                                  "stroke-width": 1, class: "trajectory" }));
  }
  located.forEach((s, i) => {
    const dot = svg("circle", {
      cx: sx(s.dims[dimX]), cy: sy(s.dims[dimY]),
      r: i === located.length - 1 ? 5 : 3,
      class: "trajectory-point", "data-day": s.day ?? "",
      fill: i === located.length - 1 ? "#222222" : "#777777",
    });
    dot.append(svg("title", {}, (s.regions ?? []).join(", ") || "unlabeled zone"));
    dot.addEventListener("click", () => callbacks.onPointClick?.(s));
    plot.append(dot);
  });

  container.append(plot);
  const labels = (state.regions ?? []).join(", ") || "unlabeled zone";
  container.append(el("p", { class: "current-regions" }, `Current: ${labels}`));
}

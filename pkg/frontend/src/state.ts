/** View state for one dimension's decision graph and its placed boundaries. */

import type { GraphPoint } from "./api.js";

export interface GraphViewState {
  sessionId: string;
  dimIndex: number;
  dimCount: number;
  clusterCountSoFar: number;
  points: GraphPoint[];
  boundaries: number[];
  inFlight: boolean;
  logScale: boolean;
  finished: boolean;
  lastSizes: number[] | null;
  error: string | null;
}

export function initialState(sessionId: string, dimCount: number): GraphViewState {
  return {
    sessionId,
    dimIndex: 0,
    dimCount,
    clusterCountSoFar: 0,
    points: [],
    boundaries: [],
    inFlight: false,
    logScale: false,
    finished: false,
    lastSizes: null,
    error: null,
  };
}

export function valueRange(points: GraphPoint[]): [number, number] {
  if (points.length === 0) return [0, 1];
  let lo = points[0].value;
  let hi = points[0].value;
  for (const p of points) {
    lo = Math.min(lo, p.value);
    hi = Math.max(hi, p.value);
  }
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

function snapStep(state: GraphViewState): number {
  const [lo, hi] = valueRange(state.points);
  return (hi - lo) * 1e-6;
}

/**
 * Insert a boundary, keeping the list strictly increasing. A value landing
 * exactly on an existing boundary snaps right by a tiny fraction of the
 * value range; if no strictly-increasing spot exists, the click is ignored.
 */
export function addBoundary(state: GraphViewState, value: number): boolean {
  const step = snapStep(state);
  let candidate = value;
  for (let guard = 0; guard < 1000; guard += 1) {
    if (!state.boundaries.includes(candidate)) break;
    candidate += step;
  }
  if (state.boundaries.includes(candidate)) return false;
  state.boundaries = [...state.boundaries, candidate].sort((a, b) => a - b);
  return true;
}

/** Move boundary ``index``; clamps strictly between its neighbors. */
export function moveBoundary(state: GraphViewState, index: number, value: number): void {
  if (index < 0 || index >= state.boundaries.length) return;
  const step = snapStep(state) || 1e-12;
  const lower = index > 0 ? state.boundaries[index - 1] + step : -Infinity;
  const upper =
    index < state.boundaries.length - 1 ? state.boundaries[index + 1] - step : Infinity;
  const next = [...state.boundaries];
  next[index] = Math.min(Math.max(value, lower), upper);
  state.boundaries = next;
}

export function removeBoundary(state: GraphViewState, index: number): void {
  state.boundaries = state.boundaries.filter((_, i) => i !== index);
}

export function canSubmit(state: GraphViewState): boolean {
  return !state.inFlight && !state.finished && state.dimIndex > 0;
}

/**
 * Pure session state: connection status, the latest frame, and rolling plot
 * buffers over a fixed time horizon. The socket callback is the only writer;
 * rendering reads this state and nothing else, so a frame log replays to an
 * identical picture.
 */

import type { StateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface PlotPoint {
  t: number;
  v: number;
}

export const BUFFER_KEYS = ["x_o", "y_o", "y_r", "E_in", "E_out", "zeta"] as const;
export type BufferKey = (typeof BUFFER_KEYS)[number];

export interface SessionState {
  status: ConnectionStatus;
  latest: StateFrame | null;
  lastError: string | null;
  framesSeen: number;
  horizon: number;
  buffers: Record<BufferKey, PlotPoint[]>;
}

export function initialState(horizon = 15): SessionState {
  const buffers = {} as Record<BufferKey, PlotPoint[]>;
  for (const key of BUFFER_KEYS) buffers[key] = [];
  return {
    status: "connecting",
    latest: null,
    lastError: null,
    framesSeen: 0,
    horizon,
    buffers,
  };
}

/** Fold one state frame into the session. Time running backwards (server
 * restart or session flush) clears the buffers instead of corrupting them. */
export function onFrame(state: SessionState, frame: StateFrame): SessionState {
  let buffers = state.buffers;
  const previous = state.latest;
  if (previous !== null && frame.t < previous.t) {
    buffers = {} as Record<BufferKey, PlotPoint[]>;
    for (const key of BUFFER_KEYS) buffers[key] = [];
  }
  const cutoff = frame.t - state.horizon;
  const next = {} as Record<BufferKey, PlotPoint[]>;
  for (const key of BUFFER_KEYS) {
    const appended = buffers[key].concat({ t: frame.t, v: frame[key] });
    next[key] = appended.filter((p) => p.t >= cutoff);
  }
  return {
    ...state,
    latest: frame,
    framesSeen: state.framesSeen + 1,
    buffers: next,
  };
}

export function onStatus(state: SessionState, status: ConnectionStatus): SessionState {
  return { ...state, status };
}

export function onError(state: SessionState, message: string): SessionState {
  return { ...state, lastError: message };
}

/** Reconnect backoff: 0.5 s doubling per attempt, capped at 8 s. */
export function reconnectDelayMs(attempt: number): number {
  const base = 500 * Math.pow(2, Math.max(0, attempt));
  return Math.min(base, 8000);
}

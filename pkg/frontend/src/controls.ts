/**
 * Throttle input model: a slider writes the value directly; held arrow keys
 * ramp it at a fixed rate so the transport delay is something you can feel
 * (tap, wait, watch the response arrive late).
 */

import { clampThrottle } from "./protocol.js";

export const RAMP_PER_SECOND = 1.2;

export type RampDirection = -1 | 0 | 1;

export function rampStep(current: number, direction: RampDirection, dtSeconds: number): number {
  if (direction === 0) return clampThrottle(current);
  return clampThrottle(current + direction * RAMP_PER_SECOND * dtSeconds);
}

/** Tracks which arrow keys are held and integrates the ramp between frames. */
export class ThrottleRamp {
  private up = false;
  private down = false;
  private lastMs: number | null = null;

  constructor(public value = 0) {}

  keyEvent(key: string, pressed: boolean): boolean {
    if (key === "ArrowUp") {
      this.up = pressed;
      return true;
    }
    if (key === "ArrowDown") {
      this.down = pressed;
      return true;
    }
    if (key === " " && pressed) {
      this.value = 0;
      return true;
    }
    return false;
  }

  setDirect(value: number): void {
    this.value = clampThrottle(value);
    this.lastMs = null;
  }

  get direction(): RampDirection {
    if (this.up === this.down) return 0;
    return this.up ? 1 : -1;
  }

  /** Advance to the given timestamp; returns the current throttle. */
  advance(nowMs: number): number {
    if (this.lastMs !== null) {
      const dt = Math.max(0, (nowMs - this.lastMs) / 1000);
      this.value = rampStep(this.value, this.direction, dt);
    }
    this.lastMs = nowMs;
    return this.value;
  }
}

/**
 * Minimal canvas strip charts for streaming telemetry. Series are decimated
 * to the display resolution with min/max buckets so envelopes of fast
 * oscillations survive.
 */

import type { PlotPoint } from "./session.js";

export interface Series {
  label: string;
  color: string;
  points: PlotPoint[];
}

/** Reduce to at most maxPoints, keeping each bucket's extremes in order. */
export function decimate(points: PlotPoint[], maxPoints: number): PlotPoint[] {
  if (maxPoints < 2) throw new Error("maxPoints must be >= 2");
  if (points.length <= maxPoints) return points;
  const bucketCount = Math.ceil(maxPoints / 2);
  const size = Math.ceil(points.length / bucketCount);
  const out: PlotPoint[] = [];
  for (let start = 0; start < points.length; start += size) {
    const bucket = points.slice(start, start + size);
    let lo = bucket[0];
    let hi = bucket[0];
    for (const p of bucket) {
      if (p.v < lo.v) lo = p;
      if (p.v > hi.v) hi = p;
    }
    if (lo === hi) {
      out.push(lo);
    } else {
      out.push(lo.t <= hi.t ? lo : hi, lo.t <= hi.t ? hi : lo);
    }
  }
  return out;
}

export interface Range {
  min: number;
  max: number;
}

/** Padded value range across series; degenerate data gets a unit band. */
export function valueRange(series: Series[]): Range {
  let min = Infinity;
  let max = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      if (p.v < min) min = p.v;
      if (p.v > max) max = p.v;
    }
  }
  if (!Number.isFinite(min) || !Number.isFinite(max)) return { min: -1, max: 1 };
  if (max - min < 1e-9) {
    const pad = Math.max(0.5, Math.abs(max) * 0.1);
    return { min: min - pad, max: max + pad };
  }
  const pad = (max - min) * 0.08;
  return { min: min - pad, max: max + pad };
}

export class StripChart {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement, private title: string) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  draw(series: Series[], horizon: number): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#111418";
    ctx.fillRect(0, 0, width, height);

    const tEnd = series.reduce(
      (acc, s) => Math.max(acc, s.points.length ? s.points[s.points.length - 1].t : acc),
      0,
    );
    const tStart = tEnd - horizon;
    const range = valueRange(series);
    const xOf = (t: number) => ((t - tStart) / horizon) * (width - 8) + 4;
    const yOf = (v: number) =>
      height - 16 - ((v - range.min) / (range.max - range.min)) * (height - 24);

    ctx.strokeStyle = "#2a2f36";
    ctx.beginPath();
    const zeroY = yOf(0);
    if (zeroY >= 0 && zeroY <= height) {
      ctx.moveTo(0, zeroY);
      ctx.lineTo(width, zeroY);
    }
    ctx.stroke();

    for (const s of series) {
      const pts = decimate(s.points, Math.max(2, Math.floor(width)));
      ctx.strokeStyle = s.color;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      pts.forEach((p, i) => {
        const x = xOf(p.t);
        const y = yOf(p.v);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    }

    ctx.fillStyle = "#9aa4b2";
    ctx.font = "11px sans-serif";
    ctx.fillText(this.title, 6, 12);
    let x = width - 6;
    for (const s of [...series].reverse()) {
      const latest = s.points.length ? s.points[s.points.length - 1].v : 0;
      const label = `${s.label} ${latest.toFixed(2)}`;
      const w = ctx.measureText(label).width;
      x -= w + 12;
      ctx.fillStyle = s.color;
      ctx.fillText(label, x, 12);
    }
  }
}

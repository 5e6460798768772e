import type { SkeletonScene } from "./skeleton.js";
import type { AngleSeries, CrossMark, CorrectionVector } from "./chart.js";

// Canvas painting only. All geometry and flag decisions arrive
// precomputed in the view models; nothing here does analysis.

export function paintSkeleton(ctx: CanvasRenderingContext2D, scene: SkeletonScene): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);

  ctx.strokeStyle = "#8aa0b4";
  ctx.lineWidth = 2;
  for (const seg of scene.segments) {
    ctx.beginPath();
    ctx.moveTo(seg.x1, seg.y1);
    ctx.lineTo(seg.x2, seg.y2);
    ctx.stroke();
  }

  for (const joint of scene.joints) {
    ctx.beginPath();
    ctx.arc(joint.x, joint.y, joint.flagged ? 7 : 4, 0, Math.PI * 2);
    ctx.fillStyle = joint.flagged ? "#e04545" : "#35506b";
    ctx.fill();
    if (joint.flagged) {
      ctx.strokeStyle = "#e04545";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
}

export interface ChartStyle {
  margin: number;
  actual: string;
  predicted: string;
  band: string;
  cross: string;
  vector: string;
  cursor: string;
}

export const CHART_STYLE: ChartStyle = {
  margin: 34,
  actual: "#1f6fb2",
  predicted: "#5a5a5a",
  band: "rgba(90, 90, 90, 0.18)",
  cross: "#d43a3a",
  vector: "#1f9d55",
  cursor: "rgba(32, 32, 32, 0.45)",
};

interface ChartScale {
  x(frame: number): number;
  y(value: number): number;
}

function chartScale(series: AngleSeries, width: number, height: number, margin: number): ChartScale {
  const f0 = series.frames[0] ?? 0;
  const f1 = series.frames[series.frames.length - 1] ?? 1;
  const values = [...series.actual, ...series.bandLow, ...series.bandHigh];
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = 0;
    hi = 1;
  }
  const pad = (hi - lo || 1) * 0.08;
  lo -= pad;
  hi += pad;
  const fSpan = Math.max(f1 - f0, 1);
  return {
    x: (frame) => margin + ((frame - f0) / fSpan) * (width - 2 * margin),
    y: (value) => height - margin - ((value - lo) / (hi - lo)) * (height - 2 * margin),
  };
}

function tracePath(ctx: CanvasRenderingContext2D, scale: ChartScale, frames: number[], values: number[]): void {
  ctx.beginPath();
  frames.forEach((f, i) => {
    const x = scale.x(f);
    const y = scale.y(values[i]);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

export function paintChart(
  ctx: CanvasRenderingContext2D,
  series: AngleSeries,
  crosses: CrossMark[],
  vectors: CorrectionVector[],
  cursorFrame: number | null,
  style: ChartStyle = CHART_STYLE,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  if (series.frames.length === 0) {
    ctx.fillStyle = "#777";
    ctx.font = "13px system-ui, sans-serif";
    ctx.fillText("no report data", 12, 24);
    return;
  }

  const scale = chartScale(series, width, height, style.margin);

  // tolerance band around the prediction
  ctx.fillStyle = style.band;
  ctx.beginPath();
  series.frames.forEach((f, i) => {
    const x = scale.x(f);
    const y = scale.y(series.bandHigh[i]);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  for (let i = series.frames.length - 1; i >= 0; i--) {
    ctx.lineTo(scale.x(series.frames[i]), scale.y(series.bandLow[i]));
  }
  ctx.closePath();
  ctx.fill();

  ctx.strokeStyle = style.predicted;
  ctx.lineWidth = 1.2;
  ctx.setLineDash([5, 4]);
  tracePath(ctx, scale, series.frames, series.predicted);
  ctx.setLineDash([]);

  ctx.strokeStyle = style.actual;
  ctx.lineWidth = 1.8;
  tracePath(ctx, scale, series.frames, series.actual);

  // correction vectors under the crosses
  ctx.strokeStyle = style.vector;
  ctx.lineWidth = 1.6;
  for (const v of vectors) {
    if (v.angleIndex !== series.angleIndex) continue;
    const x = scale.x(v.frame);
    const y0 = scale.y(v.from);
    const y1 = scale.y(v.to);
    ctx.beginPath();
    ctx.moveTo(x, y0);
    ctx.lineTo(x, y1);
    ctx.stroke();
    const head = y1 > y0 ? 5 : -5;
    ctx.beginPath();
    ctx.moveTo(x - 3, y1 - head);
    ctx.lineTo(x, y1);
    ctx.lineTo(x + 3, y1 - head);
    ctx.stroke();
  }

  ctx.strokeStyle = style.cross;
  ctx.lineWidth = 2;
  for (const mark of crosses) {
    if (mark.angleIndex !== series.angleIndex) continue;
    const x = scale.x(mark.frame);
    const y = scale.y(mark.value);
    ctx.beginPath();
    ctx.moveTo(x - 5, y - 5);
    ctx.lineTo(x + 5, y + 5);
    ctx.moveTo(x - 5, y + 5);
    ctx.lineTo(x + 5, y - 5);
    ctx.stroke();
  }

  if (cursorFrame !== null) {
    const x = scale.x(cursorFrame);
    ctx.strokeStyle = style.cursor;
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(x, style.margin * 0.5);
    ctx.lineTo(x, height - style.margin * 0.5);
    ctx.stroke();
  }

  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(`${series.angle}  (sigma ${series.sigma.toFixed(4)} rad)`, style.margin, 16);
}

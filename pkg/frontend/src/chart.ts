import type { CorrectionReportDoc } from "./types.js";

// View model for the correction graph: one angle's actual/predicted
// traces with the flag band, crosses on flagged frames, and the
// correction vectors. Everything is derived arithmetically from report
// fields; the flag decisions themselves are the service's.

const FLAG_BAND = 1.5; // the band drawn is the service's flag threshold

export interface AngleSeries {
  angle: string;
  angleIndex: number;
  sigma: number;
  frames: number[];
  actual: number[];
  predicted: number[];
  bandLow: number[];  // predicted - 1.5 sigma
  bandHigh: number[]; // predicted + 1.5 sigma
}

export interface CrossMark {
  frame: number;
  angleIndex: number;
  angle: string;
  value: number; // the flagged actual value
}

export interface CorrectionVector {
  frame: number;
  angleIndex: number;
  angle: string;
  from: number; // actual
  to: number;   // actual + delta; lands on the 1-sigma boundary
}

export function angleSeries(report: CorrectionReportDoc, angleIndex: number): AngleSeries {
  if (angleIndex < 0 || angleIndex >= report.angle_names.length) {
    throw new Error(`angle index ${angleIndex} out of range`);
  }
  const sigma = report.profile_std[angleIndex];
  const series: AngleSeries = {
    angle: report.angle_names[angleIndex],
    angleIndex,
    sigma,
    frames: [],
    actual: [],
    predicted: [],
    bandLow: [],
    bandHigh: [],
  };
  for (const rec of report.frames) {
    series.frames.push(rec.frame_index);
    series.actual.push(rec.actual[angleIndex]);
    series.predicted.push(rec.predicted[angleIndex]);
    series.bandLow.push(rec.predicted[angleIndex] - FLAG_BAND * sigma);
    series.bandHigh.push(rec.predicted[angleIndex] + FLAG_BAND * sigma);
  }
  return series;
}

// Exactly one cross per flagged (frame, angle) pair, in frame order.
export function crossMarks(report: CorrectionReportDoc): CrossMark[] {
  const marks: CrossMark[] = [];
  for (const rec of report.frames) {
    for (let j = 0; j < report.angle_names.length; j++) {
      if (rec.flagged[j]) {
        marks.push({
          frame: rec.frame_index,
          angleIndex: j,
          angle: report.angle_names[j],
          value: rec.actual[j],
        });
      }
    }
  }
  return marks;
}

// One vector per cross: from the flagged actual toward the prediction,
// ending where the service's delta puts it.
export function correctionVectors(report: CorrectionReportDoc): CorrectionVector[] {
  const vectors: CorrectionVector[] = [];
  for (const rec of report.frames) {
    for (let j = 0; j < report.angle_names.length; j++) {
      if (rec.flagged[j]) {
        vectors.push({
          frame: rec.frame_index,
          angleIndex: j,
          angle: report.angle_names[j],
          from: rec.actual[j],
          to: rec.actual[j] + rec.delta[j],
        });
      }
    }
  }
  return vectors;
}

// |corrected - predicted| should equal one sigma; returns the residual
// against that, for sanity displays and tests.
export function boundaryResidual(report: CorrectionReportDoc, v: CorrectionVector): number {
  const rec = report.frames.find((r) => r.frame_index === v.frame);
  if (!rec) throw new Error(`no report frame ${v.frame}`);
  const predicted = rec.predicted[v.angleIndex];
  const sigma = report.profile_std[v.angleIndex];
  return Math.abs(Math.abs(v.to - predicted) - sigma);
}

// Scrub support: the report restricted to frames at or before `frame`.
export function reportUpTo(report: CorrectionReportDoc, frame: number): CorrectionReportDoc {
  const frames = report.frames.filter((r) => r.frame_index <= frame);
  let flagged = 0;
  let flaggedFrames = 0;
  for (const rec of frames) {
    const n = rec.flagged.filter(Boolean).length;
    flagged += n;
    if (n > 0) flaggedFrames += 1;
  }
  return {
    ...report,
    frames,
    summary: {
      ...report.summary,
      flagged_count: flagged,
      flagged_frame_count: flaggedFrames,
      frame_count: frames.length,
    },
  };
}

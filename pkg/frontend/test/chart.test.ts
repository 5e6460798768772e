import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import {
  angleSeries,
  boundaryResidual,
  correctionVectors,
  crossMarks,
  reportUpTo,
} from "../src/chart.js";
import type { CorrectionReportDoc, SessionReport } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function loadReport(): CorrectionReportDoc {
  const report = JSON.parse(
    readFileSync(join(FIXTURES, "report.json"), "utf8"),
  ) as SessionReport;
  expect(report.correction).not.toBeNull();
  return report.correction!;
}

function cleanReport(): CorrectionReportDoc {
  const angles = ["left_knee", "right_knee"];
  return {
    pose_class: "pose_a",
    angle_names: angles,
    context: 2,
    profile_std: [0.05, 0.04],
    summary: {
      flagged_count: 0,
      flagged_frame_count: 0,
      worst_angle: null,
      frame_count: 3,
    },
    frames: [2, 3, 4].map((f) => ({
      frame_index: f,
      actual: [1.0, 1.1],
      predicted: [1.01, 1.09],
      deviation: [-0.01, 0.01],
      flagged: [false, false],
      delta: [0, 0],
    })),
  };
}

describe("crossMarks on a recorded flagged session", () => {
  it("renders exactly one cross per flagged (frame, angle) pair", () => {
    const doc = loadReport();
    const expected = new Set<string>();
    for (const rec of doc.frames) {
      rec.flagged.forEach((on, j) => {
        if (on) expected.add(`${rec.frame_index}:${j}`);
      });
    }
    expect(expected.size).toBe(doc.summary.flagged_count);
    expect(expected.size).toBeGreaterThan(0); // the fixture session is flagged

    const marks = crossMarks(doc);
    const got = new Set(marks.map((m) => `${m.frame}:${m.angleIndex}`));
    expect(marks.length).toBe(expected.size); // one each, no duplicates
    expect(got).toEqual(expected);
  });

  it("places each cross on the flagged actual value", () => {
    const doc = loadReport();
    const byFrame = new Map(doc.frames.map((r) => [r.frame_index, r]));
    for (const mark of crossMarks(doc)) {
      const rec = byFrame.get(mark.frame)!;
      expect(mark.value).toBe(rec.actual[mark.angleIndex]);
      expect(mark.angle).toBe(doc.angle_names[mark.angleIndex]);
    }
  });

  it("renders no crosses for a clean report", () => {
    expect(crossMarks(cleanReport())).toEqual([]);
  });
});

describe("correctionVectors on a recorded flagged session", () => {
  it("draws one vector per cross, from the actual value", () => {
    const doc = loadReport();
    const vectors = correctionVectors(doc);
    const marks = crossMarks(doc);
    expect(vectors.length).toBe(marks.length);
    vectors.forEach((v, i) => {
      expect(v.frame).toBe(marks[i].frame);
      expect(v.angleIndex).toBe(marks[i].angleIndex);
      expect(v.from).toBe(marks[i].value);
    });
  });

  it("endpoints recompute to the one-sigma boundary from report fields", () => {
    const doc = loadReport();
    const byFrame = new Map(doc.frames.map((r) => [r.frame_index, r]));
    for (const v of correctionVectors(doc)) {
      const rec = byFrame.get(v.frame)!;
      expect(v.to).toBe(rec.actual[v.angleIndex] + rec.delta[v.angleIndex]);
      const sigma = doc.profile_std[v.angleIndex];
      const reached = Math.abs(v.to - rec.predicted[v.angleIndex]);
      expect(Math.abs(reached - sigma)).toBeLessThan(1e-12);
      expect(boundaryResidual(doc, v)).toBeLessThan(1e-12);
    }
  });

  it("vectors point back toward the prediction", () => {
    const doc = loadReport();
    const byFrame = new Map(doc.frames.map((r) => [r.frame_index, r]));
    for (const v of correctionVectors(doc)) {
      const predicted = byFrame.get(v.frame)!.predicted[v.angleIndex];
      expect(Math.abs(v.to - predicted)).toBeLessThan(Math.abs(v.from - predicted));
    }
  });
});

describe("angleSeries", () => {
  it("bands sit at 1.5 sigma around the prediction", () => {
    const doc = loadReport();
    for (let j = 0; j < doc.angle_names.length; j++) {
      const series = angleSeries(doc, j);
      expect(series.angle).toBe(doc.angle_names[j]);
      expect(series.frames).toHaveLength(doc.frames.length);
      series.frames.forEach((f, i) => {
        const rec = doc.frames[i];
        expect(f).toBe(rec.frame_index);
        expect(series.actual[i]).toBe(rec.actual[j]);
        expect(series.bandHigh[i] - rec.predicted[j]).toBeCloseTo(1.5 * series.sigma, 12);
        expect(rec.predicted[j] - series.bandLow[i]).toBeCloseTo(1.5 * series.sigma, 12);
      });
    }
  });

  it("rejects out-of-range angle indices", () => {
    const doc = loadReport();
    expect(() => angleSeries(doc, -1)).toThrowError(/out of range/);
    expect(() => angleSeries(doc, doc.angle_names.length)).toThrowError(/out of range/);
  });
});

describe("reportUpTo (timeline scrubbing)", () => {
  it("restricts frames and recomputes summary counts", () => {
    const doc = loadReport();
    const mid = doc.frames[Math.floor(doc.frames.length / 2)].frame_index;
    const cut = reportUpTo(doc, mid);
    expect(cut.frames.every((r) => r.frame_index <= mid)).toBe(true);
    expect(cut.frames.length).toBeGreaterThan(0);
    expect(cut.frames.length).toBeLessThan(doc.frames.length);

    let flags = 0;
    let flaggedFrames = 0;
    for (const rec of cut.frames) {
      const n = rec.flagged.filter(Boolean).length;
      flags += n;
      if (n > 0) flaggedFrames += 1;
    }
    expect(cut.summary.flagged_count).toBe(flags);
    expect(cut.summary.flagged_frame_count).toBe(flaggedFrames);
    expect(cut.summary.frame_count).toBe(cut.frames.length);
    // crosses track the cut, so scrubbing never paints future flags
    expect(crossMarks(cut).every((m) => m.frame <= mid)).toBe(true);
  });

  it("scrubbing before the first prediction leaves an empty chart", () => {
    const doc = loadReport();
    const cut = reportUpTo(doc, doc.frames[0].frame_index - 1);
    expect(cut.frames).toEqual([]);
    expect(crossMarks(cut)).toEqual([]);
  });
});

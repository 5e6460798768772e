import { afterEach, describe, expect, it, vi } from "vitest";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { FileReplaySource } from "../src/replay.js";
import { parseJsonl } from "../src/schema.js";
import type { KeypointFrameMsg } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function loadFixtureFrames(): KeypointFrameMsg[] {
  return parseJsonl(readFileSync(join(FIXTURES, "keypoints.jsonl"), "utf8"));
}

function syntheticFrames(n: number, dtSeconds = 0.05): KeypointFrameMsg[] {
  return Array.from({ length: n }, (_, i) => ({
    t: i * dtSeconds,
    landmarks: { nose: [0, i, 0] },
  }));
}

// Deterministic timer world: tasks fire in timestamp order and the
// clock records exactly how much scheduled time elapsed.
class FakeScheduler {
  now = 0;
  private tasks: { at: number; fn: () => void; id: number }[] = [];
  private nextId = 1;

  set = (fn: () => void, ms: number): ReturnType<typeof setTimeout> => {
    const id = this.nextId++;
    this.tasks.push({ at: this.now + ms, fn, id });
    return id as unknown as ReturnType<typeof setTimeout>;
  };

  clear = (id: ReturnType<typeof setTimeout>): void => {
    this.tasks = this.tasks.filter((t) => t.id !== (id as unknown as number));
  };

  get pending(): number {
    return this.tasks.length;
  }

  runOne(): boolean {
    if (this.tasks.length === 0) return false;
    this.tasks.sort((a, b) => a.at - b.at || a.id - b.id);
    const task = this.tasks.shift()!;
    this.now = Math.max(this.now, task.at);
    task.fn();
    return true;
  }

  runAll(limit = 100000): void {
    let steps = 0;
    while (this.runOne()) {
      if (++steps > limit) throw new Error("scheduler runaway");
    }
  }
}

function replayAll(frames: KeypointFrameMsg[], speed: number) {
  const clock = new FakeScheduler();
  const seen: number[] = [];
  let done = 0;
  const source = new FileReplaySource(
    frames,
    {
      onFrame: (_frame, index) => seen.push(index),
      onDone: () => { done += 1; },
    },
    { speed, setTimeout: clock.set, clearTimeout: clock.clear },
  );
  source.start();
  clock.runAll();
  return { clock, seen, done };
}

describe("FileReplaySource", () => {
  afterEach(() => {
    vi.useRealTimers();
  });

  it("replays a 70-frame recorded file: 70 frames, original order", () => {
    const frames = loadFixtureFrames();
    expect(frames).toHaveLength(70);
    const { seen, done } = replayAll(frames, 1);
    expect(seen).toEqual(Array.from({ length: 70 }, (_, i) => i));
    expect(done).toBe(1);
  });

  it("pause freezes, resume continues from the next frame: no drops, no reorders", () => {
    const frames = syntheticFrames(20);
    const clock = new FakeScheduler();
    const seen: number[] = [];
    const source = new FileReplaySource(
      frames,
      { onFrame: (_f, i) => seen.push(i) },
      { setTimeout: clock.set, clearTimeout: clock.clear },
    );
    source.start();
    for (let i = 0; i < 7; i++) clock.runOne();
    source.pause();
    expect(source.running).toBe(false);
    const frozenAt = seen.length;
    clock.runAll();
    expect(seen.length).toBe(frozenAt); // nothing fires while paused
    source.resume();
    clock.runAll();
    expect(seen).toEqual(Array.from({ length: 20 }, (_, i) => i));
  });

  it("double speed halves the scheduled time (well within 10%)", () => {
    const frames = loadFixtureFrames();
    const oneX = replayAll(frames, 1);
    const twoX = replayAll(frames, 2);
    expect(oneX.seen).toEqual(twoX.seen);
    expect(twoX.clock.now).toBeGreaterThan(0);
    const ratio = oneX.clock.now / twoX.clock.now;
    expect(Math.abs(ratio - 2)).toBeLessThan(0.2); // 10% of the 2x target
  });

  it("runs on real global timers by default", async () => {
    vi.useFakeTimers();
    const frames = syntheticFrames(10, 0.02); // 9 gaps of 20ms
    const seen: number[] = [];
    let done = false;
    const source = new FileReplaySource(frames, {
      onFrame: (_f, i) => seen.push(i),
      onDone: () => { done = true; },
    });
    source.start();
    expect(seen).toEqual([0]); // first frame emits immediately
    await vi.advanceTimersByTimeAsync(9 * 20);
    expect(seen).toEqual(Array.from({ length: 10 }, (_, i) => i));
    expect(done).toBe(true);
  });

  it("stop ends the replay for good", () => {
    const frames = syntheticFrames(10);
    const clock = new FakeScheduler();
    const seen: number[] = [];
    const source = new FileReplaySource(
      frames,
      { onFrame: (_f, i) => seen.push(i) },
      { setTimeout: clock.set, clearTimeout: clock.clear },
    );
    source.start();
    clock.runOne();
    source.stop();
    source.resume();
    clock.runAll();
    expect(seen.length).toBeLessThan(10);
    expect(source.running).toBe(false);
  });

  it("clamps non-increasing timestamps to immediate dispatch", () => {
    const frames: KeypointFrameMsg[] = [
      { t: 1.0, landmarks: {} },
      { t: 1.0, landmarks: {} },
      { t: 1.2, landmarks: {} },
    ];
    const { clock, seen } = replayAll(frames, 1);
    expect(seen).toEqual([0, 1, 2]);
    expect(clock.now).toBeCloseTo(200, 6); // only the real gap costs time
  });

  it("rejects non-positive speeds", () => {
    expect(() => new FileReplaySource([], { onFrame: () => {} }, { speed: 0 }))
      .toThrowError(/speed/);
    expect(() => new FileReplaySource([], { onFrame: () => {} }, { speed: -1 }))
      .toThrowError(/speed/);
  });
});

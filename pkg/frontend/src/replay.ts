import type { KeypointFrameMsg } from "./types.js";

// Pluggable frame sources. The UI never does pose estimation; frames
// come either from a recorded JSONL file replayed at its own pace, or
// from any external provider that pushes frames in the same schema.

export interface FrameSource {
  start(): void;
  pause(): void;
  resume(): void;
  stop(): void;
  readonly running: boolean;
}

export interface ReplayHandlers {
  onFrame: (frame: KeypointFrameMsg, index: number) => void;
  onDone?: () => void;
}

export interface ReplayOptions {
  // playback speed factor; 2 plays twice as fast
  speed?: number;
  // scheduler injection for tests; defaults to global timers
  setTimeout?: (fn: () => void, ms: number) => ReturnType<typeof setTimeout>;
  clearTimeout?: (id: ReturnType<typeof setTimeout>) => void;
}

// Replays frames in file order, pacing by the recorded timestamp gaps.
// Pause freezes the cursor; resume continues from the exact next frame,
// so nothing is ever dropped or reordered.
export class FileReplaySource implements FrameSource {
  private frames: KeypointFrameMsg[];
  private handlers: ReplayHandlers;
  private speed: number;
  private setT: (fn: () => void, ms: number) => ReturnType<typeof setTimeout>;
  private clearT: (id: ReturnType<typeof setTimeout>) => void;
  private next = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private paused = false;
  private stopped = false;

  constructor(frames: KeypointFrameMsg[], handlers: ReplayHandlers,
              options: ReplayOptions = {}) {
    if (options.speed !== undefined && !(options.speed > 0)) {
      throw new Error(`speed must be positive, got ${options.speed}`);
    }
    this.frames = frames;
    this.handlers = handlers;
    this.speed = options.speed ?? 1;
    this.setT = options.setTimeout ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearT = options.clearTimeout ?? ((id) => clearTimeout(id));
  }

  get running(): boolean {
    return !this.stopped && !this.paused && this.next < this.frames.length;
  }

  get position(): number {
    return this.next;
  }

  start(): void {
    if (this.stopped || this.timer !== null) return;
    this.emit();
  }

  pause(): void {
    this.paused = true;
    if (this.timer !== null) {
      this.clearT(this.timer);
      this.timer = null;
    }
  }

  resume(): void {
    if (!this.paused || this.stopped) return;
    this.paused = false;
    this.emit();
  }

  stop(): void {
    this.pause();
    this.stopped = true;
  }

  private emit(): void {
    this.timer = null;
    if (this.stopped || this.paused) return;
    if (this.next >= this.frames.length) {
      this.handlers.onDone?.();
      return;
    }
    const i = this.next;
    const frame = this.frames[i];
    this.next = i + 1;
    this.handlers.onFrame(frame, i);
    if (this.next >= this.frames.length) {
      this.handlers.onDone?.();
      return;
    }
    // gap between recorded timestamps, scaled; clamp negatives to 0
    const gapS = this.frames[this.next].t - frame.t;
    const ms = Math.max(0, (gapS * 1000) / this.speed);
    this.timer = this.setT(() => this.emit(), ms);
  }
}

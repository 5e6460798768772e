import type { KeypointFrameMsg, ServerEvent } from "./types.js";
import { ANGLE_JOINT } from "./skeleton.js";

// Event-driven state for one live session. Every number shown in the UI
// comes from a service event; this store only accumulates and expires
// them, it never recomputes flags.

export type ConnectionState = "idle" | "connecting" | "open" | "reconnecting" | "closed";

export interface Badge {
  angle: string;
  deviation: number;
  delta: number;
  frame: number; // correction frame that (most recently) raised it
}

export interface ProbEntry {
  label: string;
  pct: number;
}

const DEFAULT_BADGE_HOLD = 8; // frames a badge outlives its last flag

export class SessionStore {
  connection: ConnectionState = "idle";
  ackFrame = -1;
  pose: Record<string, number> | null = null;
  lastError: string | null = null;
  correctionEvents = 0;
  lastFrame: KeypointFrameMsg | null = null;
  localFrames = 0;

  private badgeHold: number;
  private byAngle = new Map<string, Badge>();

  constructor(options: { badgeHoldFrames?: number } = {}) {
    this.badgeHold = options.badgeHoldFrames ?? DEFAULT_BADGE_HOLD;
  }

  setConnection(state: ConnectionState): void {
    this.connection = state;
  }

  // frames we push locally drive the skeleton; feedback comes back async
  recordLocalFrame(frame: KeypointFrameMsg): void {
    this.lastFrame = frame;
    this.localFrames += 1;
  }

  applyEvent(event: ServerEvent): void {
    switch (event.type) {
      case "ack":
        this.ackFrame = event.frame;
        break;
      case "recognition":
        this.pose = event.pose;
        break;
      case "correction": {
        this.correctionEvents += 1;
        if (event.pose) this.pose = event.pose;
        for (const flag of event.flags) {
          this.byAngle.set(flag.angle, { ...flag, frame: event.frame });
        }
        // expire badges the service stopped flagging
        for (const [angle, badge] of this.byAngle) {
          if (badge.frame < event.frame - this.badgeHold) {
            this.byAngle.delete(angle);
          }
        }
        break;
      }
      case "error":
        this.lastError = event.message;
        break;
    }
  }

  get badges(): Badge[] {
    return [...this.byAngle.values()].sort((a, b) => a.angle.localeCompare(b.angle));
  }

  get flaggedJoints(): Set<string> {
    const joints = new Set<string>();
    for (const angle of this.byAngle.keys()) {
      const joint = ANGLE_JOINT[angle];
      if (joint) joints.add(joint);
    }
    return joints;
  }

  get poseLabel(): string | null {
    if (!this.pose) return null;
    let best: string | null = null;
    let bestP = -Infinity;
    for (const [label, p] of Object.entries(this.pose)) {
      if (p > bestP) { best = label; bestP = p; }
    }
    return best;
  }

  // class probabilities as display percentages (one decimal)
  probsPercent(): ProbEntry[] {
    if (!this.pose) return [];
    return Object.entries(this.pose)
      .sort((a, b) => b[1] - a[1])
      .map(([label, p]) => ({ label, pct: Math.round(p * 1000) / 10 }));
  }

  reset(): void {
    this.ackFrame = -1;
    this.pose = null;
    this.lastError = null;
    this.correctionEvents = 0;
    this.lastFrame = null;
    this.localFrames = 0;
    this.byAngle.clear();
  }
}

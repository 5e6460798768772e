import type { KeypointFrameMsg } from "./types.js";

// Frame-schema validation for replay files and live providers. The
// service validates again on its side; rejecting locally gives the user
// a line number instead of a socket error.

export class SchemaError extends Error {}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

export function parseKeypointFrame(doc: unknown): KeypointFrameMsg {
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new SchemaError("frame must be a JSON object");
  }
  const rec = doc as Record<string, unknown>;
  if (!isFiniteNumber(rec.t)) {
    throw new SchemaError('missing or non-numeric "t"');
  }
  const landmarks = rec.landmarks;
  if (typeof landmarks !== "object" || landmarks === null || Array.isArray(landmarks)) {
    throw new SchemaError('missing "landmarks" object');
  }
  const out: Record<string, number[]> = {};
  for (const [name, p] of Object.entries(landmarks)) {
    if (!Array.isArray(p) || (p.length !== 3 && p.length !== 4)) {
      throw new SchemaError(`landmark ${name}: expected [x, y, z] or [x, y, z, visibility]`);
    }
    if (!p.every(isFiniteNumber)) {
      throw new SchemaError(`landmark ${name}: non-numeric coordinate`);
    }
    out[name] = p.slice();
  }
  const frame: KeypointFrameMsg = { t: rec.t, landmarks: out };
  if (rec.visibility !== undefined) {
    const vis = rec.visibility;
    if (typeof vis !== "object" || vis === null || Array.isArray(vis)) {
      throw new SchemaError('"visibility" must be an object');
    }
    for (const [name, v] of Object.entries(vis)) {
      if (!isFiniteNumber(v)) throw new SchemaError(`visibility ${name}: non-numeric`);
    }
    frame.visibility = vis as Record<string, number>;
  }
  return frame;
}

// One frame per line; blank lines skipped. Errors carry the 1-based line.
export function parseJsonl(text: string): KeypointFrameMsg[] {
  const frames: KeypointFrameMsg[] = [];
  let lastT = -Infinity;
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let doc: unknown;
    try {
      doc = JSON.parse(line);
    } catch (exc) {
      throw new SchemaError(`line ${i + 1}: not JSON (${(exc as Error).message})`);
    }
    let frame: KeypointFrameMsg;
    try {
      frame = parseKeypointFrame(doc);
    } catch (exc) {
      throw new SchemaError(`line ${i + 1}: ${(exc as Error).message}`);
    }
    if (frame.t < lastT) {
      throw new SchemaError(`line ${i + 1}: timestamp ${frame.t} goes backward`);
    }
    lastT = frame.t;
    frames.push(frame);
  }
  return frames;
}

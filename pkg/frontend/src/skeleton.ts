// Static connectivity for the landmark subset the service works with,
// plus projection of raw keypoints into canvas space. The skeleton is
// drawn straight from incoming frames; there is no pose math here.

export const EDGES: [string, string][] = [
  ["left_shoulder", "right_shoulder"],
  ["left_shoulder", "left_elbow"],
  ["left_elbow", "left_wrist"],
  ["right_shoulder", "right_elbow"],
  ["right_elbow", "right_wrist"],
  ["left_shoulder", "left_hip"],
  ["right_shoulder", "right_hip"],
  ["left_hip", "right_hip"],
  ["left_hip", "left_knee"],
  ["left_knee", "left_ankle"],
  ["right_hip", "right_knee"],
  ["right_knee", "right_ankle"],
  ["left_ankle", "left_heel"],
  ["left_heel", "left_foot_index"],
  ["right_ankle", "right_heel"],
  ["right_heel", "right_foot_index"],
  ["nose", "left_shoulder"],
  ["nose", "right_shoulder"],
];

// Which landmark lights up when a named angle is flagged. Angles are
// named after their vertex joint except the neck, which has no landmark
// of its own.
export const ANGLE_JOINT: Record<string, string> = {
  left_shoulder: "left_shoulder",
  right_shoulder: "right_shoulder",
  left_elbow: "left_elbow",
  right_elbow: "right_elbow",
  left_hip: "left_hip",
  right_hip: "right_hip",
  left_knee: "left_knee",
  right_knee: "right_knee",
  neck: "nose",
};

export interface ViewBox {
  width: number;
  height: number;
  margin?: number;
}

export interface JointDot {
  name: string;
  x: number;
  y: number;
  flagged: boolean;
}

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface SkeletonScene {
  segments: Segment[];
  joints: JointDot[];
}

// Fits the frame's keypoints into the canvas box, preserving aspect.
// Input coordinates are y-up (head above feet); canvas is y-down.
export function skeletonScene(
  landmarks: Record<string, number[]>,
  flaggedJoints: Set<string>,
  view: ViewBox,
): SkeletonScene {
  const margin = view.margin ?? 24;
  const names = Object.keys(landmarks);
  if (names.length === 0) return { segments: [], joints: [] };

  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const name of names) {
    const [x, y] = landmarks[name];
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const scale = Math.min(
    (view.width - 2 * margin) / spanX,
    (view.height - 2 * margin) / spanY,
  );
  const offX = (view.width - spanX * scale) / 2;
  const offY = (view.height - spanY * scale) / 2;
  const px = (x: number) => offX + (x - minX) * scale;
  const py = (y: number) => view.height - (offY + (y - minY) * scale);

  const joints: JointDot[] = names.map((name) => ({
    name,
    x: px(landmarks[name][0]),
    y: py(landmarks[name][1]),
    flagged: flaggedJoints.has(name),
  }));
  const segments: Segment[] = [];
  for (const [a, b] of EDGES) {
    const ka = landmarks[a];
    const kb = landmarks[b];
    if (!ka || !kb) continue;
    segments.push({ x1: px(ka[0]), y1: py(ka[1]), x2: px(kb[0]), y2: py(kb[1]) });
  }
  return { segments, joints };
}

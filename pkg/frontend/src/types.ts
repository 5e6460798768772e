// Wire types for the formcoach session service (HTTP + WebSocket).
// Shapes mirror the server's JSON exactly; the UI never recomputes
// flags or deltas, it only renders what the service sent.

export interface KeypointFrameMsg {
  t: number;
  // [x, y, z, visibility]; visibility defaults to 1 when absent
  landmarks: Record<string, number[]>;
  visibility?: Record<string, number>;
}

export interface AckEvent {
  type: "ack";
  frame: number;
}

export interface RecognitionEvent {
  type: "recognition";
  frame: number;
  pose: Record<string, number>;
}

export interface FlagEntry {
  angle: string;
  deviation: number; // actual - predicted, radians
  delta: number;     // signed move back to the 1-sigma boundary, radians
}

export interface CorrectionEvent {
  type: "correction";
  frame: number;
  pose: Record<string, number> | null;
  flags: FlagEntry[];
}

export interface ErrorEvent {
  type: "error";
  message: string;
}

export type ServerEvent = AckEvent | RecognitionEvent | CorrectionEvent | ErrorEvent;

export interface ReportFrame {
  frame_index: number;
  actual: number[];
  predicted: number[];
  deviation: number[];
  flagged: boolean[];
  delta: number[];
}

export interface CorrectionReportDoc {
  pose_class: string;
  angle_names: string[];
  context: number;
  profile_std: number[]; // per-angle sigma, radians
  summary: {
    flagged_count: number;
    flagged_frame_count: number;
    worst_angle: string | null;
    frame_count: number;
  };
  frames: ReportFrame[];
}

export interface SessionReport {
  session_id: string;
  state: string;
  frame_count: number;
  pose_class: string | null;
  pose_probs: Record<string, number> | null;
  correction: CorrectionReportDoc | null;
}

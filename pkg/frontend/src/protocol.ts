// Wire protocol types shared with the session server: one JSON object per
// line (raw TCP) or per WebSocket text frame.

export type Vec3 = [number, number, number];

export type CiName = "C1" | "C2" | "C3";

export const CI_DIAMETERS: Record<CiName, number> = {
  C1: 0.10,
  C2: 0.065,
  C3: 0.03,
};

export interface TrajectoryDoc {
  id: string;
  spacing_m: number;
  via_points_m: Vec3[];
  metadata: Record<string, unknown>;
}

export interface SphereFrame {
  index: number;
  scale: number;
  color: [number, number, number];
}

export interface FeedbackFrame {
  type: "feedback";
  spheres: SphereFrame[];
  current_error_m: number | null;
  nearest_index: number | null;
  path_point_m: Vec3 | null;
}

export interface SummaryFrame {
  type: "summary";
  trajectory_id: string | null;
  ci: CiName;
  mode: string;
  repetition_count: number;
  error: { err: number; [k: string]: unknown } | null;
  tracked_path: [number, number, number, number][];
  spheres: SphereFrame[];
}

export interface ErrorFrame {
  type: "error";
  code: string;
  message: string;
}

export type ServerFrame = FeedbackFrame | SummaryFrame | ErrorFrame;

export type ClientMessage =
  | { type: "hand_sample"; t_ms: number; pos_m: Vec3 }
  | { type: "command"; action: string; args: Record<string, unknown> };

export function command(action: string, args: Record<string, unknown> = {}): ClientMessage {
  return { type: "command", action, args };
}

export function handSample(tMs: number, pos: Vec3): ClientMessage {
  return { type: "hand_sample", t_ms: tMs, pos_m: pos };
}

// The canonical calibration triple makes tracking space equal plane space,
// which is exactly what a pointer-driven client wants.
export function canonicalCalibration(): ClientMessage[] {
  const points: Vec3[] = [[0, 0, 0], [1, 0, 0], [0, 1, 0]];
  return points.map((p) => command("calibrate", { pos_m: p }));
}

export function parseServerFrame(text: string): ServerFrame | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const t = (doc as { type?: unknown }).type;
  if (t === "feedback" || t === "summary" || t === "error") {
    return doc as ServerFrame;
  }
  return null;
}

export function encode(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

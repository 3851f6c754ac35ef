// Client-side generation of the built-in exercises so the trainer can
// render a tunnel and upload it with the select command. Dimensions match
// the engine's library defaults; the engine rescores everything, so this
// stays presentation-plus-upload only.

import { TrajectoryDoc, Vec3 } from "./protocol.js";

export interface ExerciseParams {
  reach: number;
  tableHeight: number;
  shoulderHeight: number;
  circleRadius: number;
  spacing: number;
}

export const DEFAULT_PARAMS: ExerciseParams = {
  reach: 0.30,
  tableHeight: 0.0,
  shoulderHeight: 0.30,
  circleRadius: 0.15,
  spacing: 0.01,
};

export const EXERCISE_IDS = ["T1", "T2", "T3", "T4"] as const;
export type ExerciseId = (typeof EXERCISE_IDS)[number];

function line(a: Vec3, b: Vec3, spacing: number): Vec3[] {
  const d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
  const len = Math.hypot(d[0], d[1], d[2]);
  const n = Math.max(1, Math.round(len / spacing));
  const pts: Vec3[] = [];
  for (let k = 0; k <= n; k++) {
    const u = k / n;
    pts.push([a[0] + u * d[0], a[1] + u * d[1], a[2] + u * d[2]]);
  }
  return pts;
}

function circle(radius: number, height: number, spacing: number): Vec3[] {
  const n = Math.max(8, Math.round((2 * Math.PI * radius) / spacing));
  const pts: Vec3[] = [];
  // clockwise seen from above, starting at the start marker
  for (let k = 0; k <= n; k++) {
    const theta = -Math.PI / 2 - (2 * Math.PI * k) / n;
    pts.push([radius * Math.cos(theta), radius + radius * Math.sin(theta), height]);
  }
  pts[pts.length - 1] = [...pts[0]] as Vec3;
  return pts;
}

export function generateExercise(
  id: ExerciseId,
  params: ExerciseParams = DEFAULT_PARAMS,
): TrajectoryDoc {
  const { reach, tableHeight, shoulderHeight, circleRadius, spacing } = params;
  let pts: Vec3[];
  switch (id) {
    case "T1":
      pts = line([0, 0, tableHeight], [reach, 0, tableHeight], spacing);
      break;
    case "T2":
      pts = line([0, 0, shoulderHeight], [reach, 0, shoulderHeight], spacing);
      break;
    case "T3":
      pts = line([0, 0, shoulderHeight], [0, reach, shoulderHeight], spacing);
      break;
    case "T4":
      pts = circle(circleRadius, tableHeight, spacing);
      break;
  }
  let total = 0;
  for (let i = 1; i < pts.length; i++) {
    total += Math.hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1],
                        pts[i][2] - pts[i - 1][2]);
  }
  return {
    id,
    spacing_m: total / (pts.length - 1),
    via_points_m: pts,
    metadata: { exercise: id, source: "trainer-ui" },
  };
}

export function pathLength(pts: Vec3[]): number {
  let total = 0;
  for (let i = 1; i < pts.length; i++) {
    total += Math.hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1],
                        pts[i][2] - pts[i - 1][2]);
  }
  return total;
}

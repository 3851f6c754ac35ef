// Client-side session store: the single source of truth the renderer and
// widgets read. It never computes scores - sphere scale/color always equal
// the last feedback frame values; everything else is bookkeeping.

import {
  CI_DIAMETERS,
  CiName,
  ServerFrame,
  SphereFrame,
  TrajectoryDoc,
  Vec3,
} from "./protocol.js";

export type Phase = "calibrating" | "selecting" | "executing" | "stopped";

export interface SphereView {
  position: Vec3;
  scale: number;
  color: [number, number, number];
}

export interface Toast {
  code: string;
  message: string;
  atMs: number;
}

export class SessionStore {
  phase: Phase = "calibrating";
  ci: CiName = "C1";
  trajectory: TrajectoryDoc | null = null;
  spheres: SphereView[] = [];
  currentError: number | null = null;
  nearestIndex: number | null = null;
  pathPoints: Vec3[] = [];
  summaryPath: Vec3[] = [];
  repetitionCount = 0;
  taskError: number | null = null;
  toasts: Toast[] = [];
  connected = false;
  // instrumentation: when each sphere last changed (for liveness checks)
  sphereChangedAt = new Map<number, number>();

  calibrated(): void {
    this.phase = "selecting";
  }

  selectTrajectory(doc: TrajectoryDoc): void {
    this.trajectory = doc;
    this.resetSpheres();
  }

  setCi(ci: CiName): void {
    this.ci = ci;
    this.resetSpheres();
  }

  placeMove(dx: number, dy: number): void {
    if (!this.trajectory) return;
    const moved = this.trajectory.via_points_m.map(
      (p): Vec3 => [p[0] + dx, p[1] + dy, p[2]],
    );
    this.trajectory = { ...this.trajectory, via_points_m: moved };
    this.resetSpheres();
  }

  started(): void {
    this.phase = "executing";
    this.pathPoints = [];
    this.summaryPath = [];
    this.taskError = null;
    this.repetitionCount = 0;
    this.sphereChangedAt.clear();
    this.resetSpheres();
  }

  private resetSpheres(): void {
    if (!this.trajectory) {
      this.spheres = [];
      return;
    }
    this.spheres = this.trajectory.via_points_m.map((p) => ({
      position: p,
      scale: 1.0,
      color: [255, 0, 0] as [number, number, number],
    }));
  }

  apply(frame: ServerFrame, nowMs: number): void {
    if (frame.type === "error") {
      this.toasts.push({ code: frame.code, message: frame.message, atMs: nowMs });
      if (this.toasts.length > 8) this.toasts.shift();
      return;
    }
    if (frame.type === "feedback") {
      for (const s of frame.spheres) {
        this.applySphere(s, nowMs);
      }
      if (frame.current_error_m !== null) {
        this.currentError = frame.current_error_m;
        this.nearestIndex = frame.nearest_index;
      }
      if (frame.path_point_m !== null) {
        this.pathPoints.push(frame.path_point_m);
      }
      return;
    }
    // summary
    this.phase = "stopped";
    this.repetitionCount = frame.repetition_count;
    this.taskError = frame.error ? frame.error.err : null;
    this.summaryPath = frame.tracked_path.map(
      ([, x, y, z]): Vec3 => [x, y, z],
    );
    for (const s of frame.spheres) {
      this.applySphere(s, nowMs);
    }
  }

  private applySphere(s: SphereFrame, nowMs: number): void {
    const view = this.spheres[s.index];
    if (!view) return;
    view.scale = s.scale;
    view.color = s.color;
    this.sphereChangedAt.set(s.index, nowMs);
  }

  tunnelDiameter(): number {
    return CI_DIAMETERS[this.ci];
  }

  greenCount(): number {
    return this.spheres.filter((s) => s.color[1] > s.color[0]).length;
  }
}

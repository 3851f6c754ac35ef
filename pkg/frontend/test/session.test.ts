import { describe, expect, it } from "vitest";

import { generateExercise } from "../src/exercises.js";
import { FeedbackFrame, SummaryFrame } from "../src/protocol.js";
import { SessionStore } from "../src/session.js";

function readyStore(): SessionStore {
  const store = new SessionStore();
  store.calibrated();
  store.selectTrajectory(generateExercise("T1"));
  store.setCi("C2");
  store.started();
  return store;
}

describe("session store", () => {
  it("renders the tunnel fully red on start", () => {
    const store = readyStore();
    expect(store.phase).toBe("executing");
    expect(store.spheres.length).toBeGreaterThan(10);
    for (const s of store.spheres) {
      expect(s.scale).toBe(1.0);
      expect(s.color).toEqual([255, 0, 0]);
    }
  });

  it("applies feedback frames verbatim - the UI computes nothing", () => {
    const store = readyStore();
    const frame: FeedbackFrame = {
      type: "feedback",
      spheres: [{ index: 3, scale: 0.3, color: [0, 100, 0] }],
      current_error_m: 0.004,
      nearest_index: 3,
      path_point_m: [0.1, 0, 0],
    };
    store.apply(frame, 1000);
    expect(store.spheres[3].scale).toBe(0.3);
    expect(store.spheres[3].color).toEqual([0, 100, 0]);
    expect(store.currentError).toBe(0.004);
    expect(store.pathPoints).toHaveLength(1);
    expect(store.greenCount()).toBe(1);
    expect(store.sphereChangedAt.get(3)).toBe(1000);
  });

  it("keeps sphere state on frames without changes", () => {
    const store = readyStore();
    store.apply({
      type: "feedback",
      spheres: [],
      current_error_m: 0.09,
      nearest_index: 0,
      path_point_m: [0, 0.09, 0],
    }, 5);
    expect(store.spheres.every((s) => s.color[0] === 255)).toBe(true);
    expect(store.currentError).toBe(0.09);
  });

  it("stores the summary path polyline on stop", () => {
    const store = readyStore();
    const summary: SummaryFrame = {
      type: "summary",
      trajectory_id: "T1",
      ci: "C2",
      mode: "overwrite",
      repetition_count: 2,
      error: { err: 0.012 },
      tracked_path: [[0, 0, 0, 0], [16, 0.05, 0, 0], [32, 0.1, 0, 0]],
      spheres: [{ index: 0, scale: 0.4, color: [40, 80, 0] }],
    };
    store.apply(summary, 99);
    expect(store.phase).toBe("stopped");
    expect(store.summaryPath).toEqual([[0, 0, 0], [0.05, 0, 0], [0.1, 0, 0]]);
    expect(store.taskError).toBe(0.012);
    expect(store.repetitionCount).toBe(2);
    expect(store.spheres[0].scale).toBe(0.4);
  });

  it("collects error frames as toasts", () => {
    const store = readyStore();
    store.apply({ type: "error", code: "WrongPhase", message: "nope" }, 1);
    expect(store.toasts).toHaveLength(1);
    expect(store.toasts[0].code).toBe("WrongPhase");
  });

  it("re-renders the tunnel at the new diameter on ci change", () => {
    const store = readyStore();
    store.apply({
      type: "feedback",
      spheres: [{ index: 1, scale: 0.3, color: [0, 100, 0] }],
      current_error_m: 0,
      nearest_index: 1,
      path_point_m: [0, 0, 0],
    }, 1);
    expect(store.tunnelDiameter()).toBeCloseTo(0.065);
    store.phase = "selecting";
    store.setCi("C3");
    expect(store.tunnelDiameter()).toBeCloseTo(0.03);
    // tunnel resets to red at the new size
    expect(store.spheres[1].color).toEqual([255, 0, 0]);
  });

  it("place_move shifts the trajectory in the plane only", () => {
    const store = readyStore();
    store.phase = "selecting";
    const before = store.trajectory!.via_points_m.map((p) => [...p]);
    store.placeMove(0.05, -0.02);
    const after = store.trajectory!.via_points_m;
    for (let i = 0; i < after.length; i++) {
      expect(after[i][0]).toBeCloseTo(before[i][0] + 0.05, 12);
      expect(after[i][1]).toBeCloseTo(before[i][1] - 0.02, 12);
      expect(after[i][2]).toBe(before[i][2]);
    }
  });
});

describe("client-side exercises", () => {
  it("T4 closes on itself with the right circumference", () => {
    const t4 = generateExercise("T4");
    const pts = t4.via_points_m;
    const first = pts[0];
    const last = pts[pts.length - 1];
    expect(Math.hypot(first[0] - last[0], first[1] - last[1])).toBeLessThan(
      t4.spacing_m);
    let total = 0;
    for (let i = 1; i < pts.length; i++) {
      total += Math.hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);
    }
    expect(total).toBeCloseTo(2 * Math.PI * 0.15, 1);
  });

  it("T1 runs along x at table level", () => {
    const t1 = generateExercise("T1");
    for (const p of t1.via_points_m) {
      expect(p[1]).toBe(0);
      expect(p[2]).toBe(0);
    }
    expect(t1.via_points_m[t1.via_points_m.length - 1][0]).toBeCloseTo(0.3, 9);
  });
});

// UI liveness acceptance: a scripted pointer drag along the T1 centerline
// against the real engine server. Every traversed sphere has to turn green
// within 100 ms of the sample that scored it, and stop must deliver the
// path polyline. The store is driven exactly like the browser client,
// over the same line protocol (TCP here; the frames are identical).

import { spawn, ChildProcess } from "node:child_process";
import net from "node:net";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { generateExercise } from "../src/exercises.js";
import {
  ClientMessage,
  ServerFrame,
  canonicalCalibration,
  command,
  encode,
  handSample,
  parseServerFrame,
} from "../src/protocol.js";
import { SessionStore } from "../src/session.js";

const PKG_ROOT = path.resolve(__dirname, "..", "..");

let server: ChildProcess;
let port: number;

async function waitForServer(p: number, tries = 50): Promise<void> {
  for (let i = 0; i < tries; i++) {
    const ok = await new Promise<boolean>((resolve) => {
      const sock = net.connect(p, "127.0.0.1");
      sock.once("connect", () => { sock.end(); resolve(true); });
      sock.once("error", () => resolve(false));
    });
    if (ok) return;
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("engine server did not come up");
}

class TcpClient {
  private sock: net.Socket;
  private buffer = "";
  private frameHandler: (f: ServerFrame, atMs: number) => void = () => undefined;

  constructor(p: number) {
    this.sock = net.connect(p, "127.0.0.1");
    this.sock.setNoDelay(true);
    this.sock.on("data", (chunk) => {
      this.buffer += chunk.toString("utf-8");
      let idx;
      while ((idx = this.buffer.indexOf("\n")) >= 0) {
        const line = this.buffer.slice(0, idx);
        this.buffer = this.buffer.slice(idx + 1);
        const frame = parseServerFrame(line);
        if (frame) this.frameHandler(frame, performance.now());
      }
    });
  }

  onFrame(h: (f: ServerFrame, atMs: number) => void): void {
    this.frameHandler = h;
  }

  send(msg: ClientMessage): void {
    this.sock.write(encode(msg) + "\n");
  }

  close(): void {
    this.sock.end();
  }
}

beforeAll(async () => {
  port = 20000 + Math.floor(Math.random() * 20000);
  server = spawn("python3", ["-m", "tunneltrainer.cli", "serve",
                             "--port", String(port), "--log",
                             "/tmp/tunneltrainer-ui-test.jsonl"],
                 { cwd: PKG_ROOT, stdio: "ignore" });
  await waitForServer(port);
}, 30000);

afterAll(() => {
  server?.kill();
});

describe("trainer liveness against the live engine", () => {
  it("drag along the T1 centerline turns >=95% of traversed spheres green within 100 ms; stop renders the path", async () => {
    const store = new SessionStore();
    const client = new TcpClient(port);
    const sendTimes: number[] = [];
    let sampleResponses = 0;
    const latencies: number[] = [];
    let summaryseen: Promise<void>;
    let resolveSummary: () => void = () => undefined;
    summaryseen = new Promise((r) => { resolveSummary = r; });

    client.onFrame((frame, atMs) => {
      store.apply(frame, atMs);
      if (frame.type === "feedback" && frame.current_error_m !== null) {
        // responses are 1:1 and ordered with the samples we sent
        latencies.push(atMs - sendTimes[sampleResponses]);
        sampleResponses += 1;
      }
      if (frame.type === "summary") resolveSummary();
    });

    for (const msg of canonicalCalibration()) client.send(msg);
    store.calibrated();
    const doc = generateExercise("T1");
    client.send(command("select", { trajectory: doc }));
    store.selectTrajectory(doc);
    client.send(command("set_ci", { ci: "C2" }));
    store.setCi("C2");
    client.send(command("start"));
    store.started();

    // scripted pointer drag: out and back along the centerline
    const steps = 140;
    for (let k = 0; k <= steps; k++) {
      const u = k / steps;
      const x = 0.3 * (1 - Math.abs(2 * u - 1));
      sendTimes.push(performance.now());
      client.send(handSample(k * 8.0, [x, 0, 0]));
      await new Promise((r) => setTimeout(r, 4));
    }
    // let the tail of responses drain
    const deadline = Date.now() + 5000;
    while (sampleResponses < steps + 1 && Date.now() < deadline) {
      await new Promise((r) => setTimeout(r, 20));
    }
    expect(sampleResponses).toBe(steps + 1);

    // every sphere the drag passed over should be green now...
    const green = store.greenCount();
    const traversed = store.spheres.length;  // full centerline sweep
    expect(green / traversed).toBeGreaterThanOrEqual(0.95);

    // ...and the per-sample feedback latency stayed under 100 ms
    const slow = latencies.filter((l) => l >= 100).length;
    expect(slow / latencies.length).toBeLessThanOrEqual(0.05);

    client.send(command("stop"));
    await summaryseen;
    expect(store.phase).toBe("stopped");
    expect(store.summaryPath.length).toBe(steps + 1);  // path polyline to draw
    expect(store.repetitionCount).toBeGreaterThanOrEqual(1);
    client.close();
  }, 30000);

  it("wrong-phase commands surface as toasts and the session survives", async () => {
    const store = new SessionStore();
    const client = new TcpClient(port);
    const frames: ServerFrame[] = [];
    client.onFrame((f, atMs) => {
      frames.push(f);
      store.apply(f, atMs);
    });
    client.send(command("stop"));  // before any calibration
    const deadline = Date.now() + 3000;
    while (frames.length < 1 && Date.now() < deadline) {
      await new Promise((r) => setTimeout(r, 20));
    }
    expect(frames[0].type).toBe("error");
    expect(store.toasts.length).toBe(1);
    client.close();
  }, 15000);
});

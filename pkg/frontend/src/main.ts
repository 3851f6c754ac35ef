// Entry point: wire the transport, the store, the renderer and the widgets
// together. Samples go out at display rate while executing; every number
// shown comes back from the engine.

import { generateExercise, ExerciseId } from "./exercises.js";
import {
  CiName,
  Vec3,
  canonicalCalibration,
  command,
  handSample,
} from "./protocol.js";
import { Renderer } from "./renderer.js";
import { SessionStore } from "./session.js";
import { Ui } from "./ui.js";
import { WebSocketTransport } from "./transport.js";

const store = new SessionStore();
const transport = new WebSocketTransport(`ws://${location.host}/session`);

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const renderer = Renderer.create(canvas);
const proxy: Vec3 = [0, 0, 0.02];
let sessionStart = performance.now();
let calibrated = false;
let placingAnchor: [number, number] | null = null;

function calibrate(): void {
  for (const msg of canonicalCalibration()) transport.send(msg);
  store.calibrated();
  calibrated = true;
}

const ui = new Ui({
  onSelect(exercise: string) {
    if (!calibrated) calibrate();
    const doc = generateExercise(exercise as ExerciseId);
    transport.send(command("select", { trajectory: doc }));
    store.selectTrajectory(doc);
  },
  onPlaceMove() {
    placingAnchor = null;
  },
  onCi(ci: CiName) {
    transport.send(command("set_ci", { ci }));
    store.setCi(ci);
  },
  onMode(mode: string) {
    transport.send(command("set_mode", { mode }));
  },
  onStart() {
    transport.send(command("start"));
    sessionStart = performance.now();
    store.started();
  },
  onStop() {
    transport.send(command("stop"));
  },
  onReset() {
    transport.send(command("reset_tunnel"));
  },
});

document.body.appendChild(ui.root);

transport.onFrame((frame) => store.apply(frame, performance.now()));
transport.onStatus((up) => {
  store.connected = up;
  if (up && calibrated && store.phase === "calibrating") {
    // session state lives server-side per connection: recalibrate after a drop
    calibrate();
  }
});

let orbiting = false;
let dragging = false;
let last: [number, number] = [0, 0];

canvas.addEventListener("pointerdown", (ev) => {
  last = [ev.offsetX, ev.offsetY];
  if (ev.shiftKey) {
    orbiting = true;
  } else {
    dragging = true;
    movePointer(ev.offsetX, ev.offsetY);
  }
  canvas.setPointerCapture(ev.pointerId);
});
canvas.addEventListener("pointermove", (ev) => {
  if (orbiting) {
    renderer.camera.yaw += (ev.offsetX - last[0]) * 0.01;
    renderer.camera.pitch = Math.min(
      1.45, Math.max(0.25, renderer.camera.pitch + (ev.offsetY - last[1]) * 0.01));
    last = [ev.offsetX, ev.offsetY];
    return;
  }
  if (dragging) movePointer(ev.offsetX, ev.offsetY);
});
canvas.addEventListener("pointerup", () => {
  orbiting = false;
  dragging = false;
  placingAnchor = null;
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  proxy[2] = Math.min(0.5, Math.max(-0.1, proxy[2] - ev.deltaY * 0.0004));
});

function movePointer(sx: number, sy: number): void {
  const [x, y] = renderer.unproject(sx, sy, proxy[2]);
  if (ui.placing && store.phase === "selecting" && store.trajectory) {
    if (placingAnchor) {
      const dx = x - placingAnchor[0];
      const dy = y - placingAnchor[1];
      transport.send(command("place_move", { dx_m: dx, dy_m: dy }));
      store.placeMove(dx, dy);
    }
    placingAnchor = [x, y];
    return;
  }
  proxy[0] = x;
  proxy[1] = y;
}

function frame(): void {
  requestAnimationFrame(frame);
  if (store.phase === "executing") {
    transport.send(handSample(performance.now() - sessionStart, [...proxy] as Vec3));
  }
  renderer.draw(store, proxy);
  ui.render(store);
}

requestAnimationFrame(frame);

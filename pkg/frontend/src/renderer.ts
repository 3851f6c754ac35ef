// Minimal 3D canvas renderer: orbit camera (yaw around the plane normal,
// pitch toward top-down), orthographic projection, painter-sorted spheres.
// The z axis of the scene is the calibrated plane normal.

import { Vec3 } from "./protocol.js";
import { SessionStore } from "./session.js";

export interface Camera {
  yaw: number;
  pitch: number;       // 0 = side view, pi/2 = top-down
  scale: number;       // px per meter
  center: Vec3;
}

export class Renderer {
  camera: Camera = {
    yaw: -0.5,
    pitch: 0.9,
    scale: 900,
    center: [0.15, 0.15, 0.1],
  };

  constructor(private canvas: HTMLCanvasElement,
              private ctx: CanvasRenderingContext2D) {}

  static create(canvas: HTMLCanvasElement): Renderer {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    return new Renderer(canvas, ctx);
  }

  project(p: Vec3): { x: number; y: number; depth: number } {
    const { yaw, pitch, scale, center } = this.camera;
    const rx = p[0] - center[0];
    const ry = p[1] - center[1];
    const rz = p[2] - center[2];
    const cy = Math.cos(yaw), sy = Math.sin(yaw);
    const x1 = cy * rx - sy * ry;
    const y1 = sy * rx + cy * ry;
    const cp = Math.cos(pitch), sp = Math.sin(pitch);
    const v = -y1 * sp + rz * cp;        // screen-vertical component
    const depth = y1 * cp + rz * sp;     // toward the viewer
    return {
      x: this.canvas.width / 2 + x1 * scale,
      y: this.canvas.height / 2 - v * scale,
      depth,
    };
  }

  // Pointer position -> plane coordinates at a given height above the plane.
  unproject(sx: number, sy: number, z: number): [number, number] {
    const { yaw, pitch, scale, center } = this.camera;
    const x1 = (sx - this.canvas.width / 2) / scale;
    const v = (this.canvas.height / 2 - sy) / scale;
    const rz = z - center[2];
    const sp = Math.max(Math.sin(pitch), 0.2);
    const y1 = (rz * Math.cos(pitch) - v) / sp;
    const cyaw = Math.cos(yaw), syaw = Math.sin(yaw);
    const x = cyaw * x1 + syaw * y1 + center[0];
    const y = -syaw * x1 + cyaw * y1 + center[1];
    return [x, y];
  }

  draw(store: SessionStore, proxy: Vec3): void {
    const ctx = this.ctx;
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    this.drawGrid();

    const diameter = store.tunnelDiameter();
    const order = store.spheres
      .map((s, i) => ({ s, i, p: this.project(s.position) }))
      .sort((a, b) => a.p.depth - b.p.depth);
    for (const { s, p } of order) {
      const r = Math.max(1.5, (diameter / 2) * s.scale * this.camera.scale);
      ctx.beginPath();
      ctx.arc(p.x, p.y, r, 0, 2 * Math.PI);
      ctx.fillStyle = `rgba(${s.color[0]},${s.color[1]},${s.color[2]},0.55)`;
      ctx.fill();
      ctx.strokeStyle = `rgb(${s.color[0]},${s.color[1]},${s.color[2]})`;
      ctx.stroke();
    }

    this.drawPath(store.phase === "stopped" ? store.summaryPath : store.pathPoints,
                  store.phase === "stopped" ? "#6fd3ff" : "rgba(111,211,255,0.6)",
                  store.phase === "stopped" ? 2.5 : 1.5);

    // hand proxy
    const hp = this.project(proxy);
    ctx.beginPath();
    ctx.arc(hp.x, hp.y, 7, 0, 2 * Math.PI);
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(hp.x - 12, hp.y);
    ctx.lineTo(hp.x + 12, hp.y);
    ctx.moveTo(hp.x, hp.y - 12);
    ctx.lineTo(hp.x, hp.y + 12);
    ctx.stroke();
  }

  private drawPath(points: Vec3[], style: string, width: number): void {
    if (points.length < 2) return;
    const ctx = this.ctx;
    ctx.beginPath();
    const first = this.project(points[0]);
    ctx.moveTo(first.x, first.y);
    for (let i = 1; i < points.length; i++) {
      const p = this.project(points[i]);
      ctx.lineTo(p.x, p.y);
    }
    ctx.strokeStyle = style;
    ctx.lineWidth = width;
    ctx.stroke();
    ctx.lineWidth = 1;
  }

  private drawGrid(): void {
    const ctx = this.ctx;
    ctx.strokeStyle = "rgba(120,140,160,0.25)";
    for (let gx = -0.2; gx <= 0.5001; gx += 0.1) {
      const a = this.project([gx, -0.2, 0]);
      const b = this.project([gx, 0.5, 0]);
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
    for (let gy = -0.2; gy <= 0.5001; gy += 0.1) {
      const a = this.project([-0.2, gy, 0]);
      const b = this.project([0.5, gy, 0]);
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
  }
}

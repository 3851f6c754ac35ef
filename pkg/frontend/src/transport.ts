// WebSocket transport with reconnect. The store and widgets only see the
// Transport interface, so tests can drive them over any byte pipe.

import { ClientMessage, ServerFrame, encode, parseServerFrame } from "./protocol.js";

export interface Transport {
  send(msg: ClientMessage): void;
  onFrame(handler: (frame: ServerFrame) => void): void;
  onStatus(handler: (connected: boolean) => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private ws: WebSocket | null = null;
  private frameHandler: (frame: ServerFrame) => void = () => undefined;
  private statusHandler: (connected: boolean) => void = () => undefined;
  private closed = false;
  private retryMs = 500;

  constructor(private url: string) {
    this.connect();
  }

  private connect(): void {
    if (this.closed) return;
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = 500;
      this.statusHandler(true);
    };
    ws.onmessage = (ev) => {
      const frame = parseServerFrame(String(ev.data));
      if (frame) this.frameHandler(frame);
    };
    ws.onclose = () => {
      this.statusHandler(false);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 5000);
      }
    };
    ws.onerror = () => ws.close();
  }

  send(msg: ClientMessage): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(encode(msg));
    }
  }

  onFrame(handler: (frame: ServerFrame) => void): void {
    this.frameHandler = handler;
  }

  onStatus(handler: (connected: boolean) => void): void {
    this.statusHandler = handler;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}

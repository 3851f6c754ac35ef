"""Session server: line-delimited JSON over TCP, with a WebSocket upgrade
and minimal static file serving on the same port for browser clients.

Each connection gets its own engine session (sessions are fully isolated);
inbound and outbound messages of every session are appended, with server
timestamps, to a single JSONL log by one writer task. Clients sending hand
samples faster than the configured rate are throttled (reads are delayed,
so TCP backpressure does the rest) but never dropped.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import struct
import threading
import time
from pathlib import Path

from .config import EngineConfig, default_config
from .errors import SchemaViolation
from .geometry import Trajectory
from .protocol import SessionDriver, builtin_resolver, encode, error_frame
from .storage import load_trajectory

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class TunnelServer:
    """One engine session per client connection."""

    def __init__(self, config: EngineConfig | None = None,
                 host: str = "127.0.0.1", port: int = 8765,
                 static_dir: str | None = None,
                 log_path: str | None = None):
        self.config = config or default_config()
        self.host = host
        self.port = port
        self.static_dir = Path(static_dir) if static_dir else None
        if log_path is None:
            log_dir = Path(self.config.server.log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)
            log_path = log_dir / f"sessions-{int(time.time())}.jsonl"
        self.log_path = Path(log_path)
        self._server: asyncio.AbstractServer | None = None
        self._log_queue: asyncio.Queue | None = None
        self._log_task: asyncio.Task | None = None
        self._session_counter = 0
        self._writers: set[asyncio.StreamWriter] = set()

    # -- lifecycle ------------------------------------------------------------

    async def start(self):
        self._log_queue = asyncio.Queue()
        self._log_task = asyncio.create_task(self._log_writer())
        self._server = await asyncio.start_server(self._handle_conn,
                                                  self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        return self

    async def stop(self):
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for writer in list(self._writers):
            try:
                writer.close()
            except (ConnectionResetError, OSError):
                pass
        await asyncio.sleep(0)
        if self._log_queue is not None:
            await self._log_queue.put(None)
            await self._log_task

    async def serve_forever(self):
        await self.start()
        async with self._server:
            await self._server.serve_forever()

    def run(self):  # pragma: no cover - blocking entry point
        try:
            asyncio.run(self.serve_forever())
        except KeyboardInterrupt:
            pass

    # -- logging ----------------------------------------------------------------

    async def _log_writer(self):
        with open(self.log_path, "a", encoding="utf-8") as fh:
            while True:
                record = await self._log_queue.get()
                if record is None:
                    break
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")
                fh.flush()

    def _log(self, session_id: int, direction: str, msg: dict):
        record = {"session": session_id, "dir": direction,
                  "ts_ms": time.time() * 1000.0, "msg": msg}
        self._log_queue.put_nowait(record)

    # -- trajectory library --------------------------------------------------------

    def _resolve_trajectory(self, traj_id: str) -> Trajectory:
        tdir = self.config.server.trajectory_dir
        if tdir:
            candidate = Path(tdir) / f"{traj_id}.json"
            if candidate.exists():
                return load_trajectory(candidate)
        return builtin_resolver(traj_id)

    # -- connection handling ----------------------------------------------------------

    async def _handle_conn(self, reader: asyncio.StreamReader,
                           writer: asyncio.StreamWriter):
        self._writers.add(writer)
        try:
            first = await reader.readline()
            if not first:
                return
            if first.startswith(b"GET ") or first.startswith(b"HEAD "):
                await self._handle_http(first, reader, writer)
            else:
                await self._line_session(first, reader, writer)
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            self._writers.discard(writer)
            try:
                writer.close()
                await writer.wait_closed()
            except (ConnectionResetError, OSError):
                pass

    def _new_driver(self) -> tuple[int, SessionDriver]:
        self._session_counter += 1
        return self._session_counter, SessionDriver(
            params=self.config.feedback, resolver=self._resolve_trajectory)

    # -- raw line protocol ---------------------------------------------------------------

    async def _line_session(self, first_line: bytes, reader, writer):
        session_id, driver = self._new_driver()
        throttle = _Throttle(self.config.server.max_sample_rate_hz)
        line = first_line
        while line:
            text = line.decode("utf-8", errors="replace").strip()
            if text:
                for out in await self._process(driver, session_id, text, throttle):
                    writer.write((out + "\n").encode("utf-8"))
                await writer.drain()
            line = await reader.readline()

    async def _process(self, driver: SessionDriver, session_id: int,
                       text: str, throttle: "_Throttle") -> list[str]:
        try:
            msg = json.loads(text)
        except json.JSONDecodeError as e:
            err = error_frame(SchemaViolation(f"malformed JSON: {e.msg}"))
            self._log(session_id, "out", err)
            return [encode(err)]
        if isinstance(msg, dict) and msg.get("type") == "hand_sample":
            await throttle.acquire()
        self._log(session_id, "in", msg if isinstance(msg, dict) else {"raw": msg})
        outs = driver.handle_parsed(text)
        for out in outs:
            self._log(session_id, "out", out)
        return [encode(o) for o in outs]

    # -- http / websocket --------------------------------------------------------------------

    async def _handle_http(self, request_line: bytes, reader, writer):
        headers: dict[str, str] = {}
        while True:
            line = await reader.readline()
            if line in (b"\r\n", b"\n", b""):
                break
            name, _, value = line.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()

        if headers.get("upgrade", "").lower() == "websocket":
            await self._ws_session(headers, reader, writer)
            return
        await self._serve_static(request_line, writer)

    async def _serve_static(self, request_line: bytes, writer):
        target = request_line.decode("latin-1").split()[1]
        path = target.split("?")[0]
        if path.endswith("/"):
            path += "index.html"
        body = b"not found"
        status = "404 Not Found"
        ctype = "text/plain; charset=utf-8"
        if self.static_dir is not None:
            candidate = (self.static_dir / path.lstrip("/")).resolve()
            if (candidate.is_file()
                    and str(candidate).startswith(str(self.static_dir.resolve()))):
                body = candidate.read_bytes()
                status = "200 OK"
                ctype = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
        head = (f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n")
        writer.write(head.encode("latin-1") + body)
        await writer.drain()

    async def _ws_session(self, headers: dict[str, str], reader, writer):
        key = headers.get("sec-websocket-key")
        if not key:
            writer.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            await writer.drain()
            return
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode("latin-1")).digest()).decode()
        writer.write((f"HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\n"
                      f"Connection: Upgrade\r\nSec-WebSocket-Accept: {accept}\r\n\r\n")
                     .encode("latin-1"))
        await writer.drain()

        session_id, driver = self._new_driver()
        throttle = _Throttle(self.config.server.max_sample_rate_hz)
        while True:
            msg = await _ws_read_message(reader)
            if msg is None:
                break
            if msg == b"\x09":  # ping sentinel from the frame reader
                writer.write(_ws_frame(b"", opcode=0xA))
                await writer.drain()
                continue
            text = msg.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            for out in await self._process(driver, session_id, text, throttle):
                writer.write(_ws_frame(out.encode("utf-8")))
            await writer.drain()
        try:
            writer.write(_ws_frame(b"", opcode=0x8))
            await writer.drain()
        except (ConnectionResetError, OSError):
            pass


class _Throttle:
    """Token bucket: above the allowed rate, delay instead of dropping."""

    def __init__(self, rate_hz: float, burst: float | None = None):
        self.rate = max(rate_hz, 1e-6)
        self.burst = burst if burst is not None else max(1.0, self.rate / 4.0)
        self.tokens = self.burst
        self.stamp = time.monotonic()

    async def acquire(self):
        now = time.monotonic()
        self.tokens = min(self.burst, self.tokens + (now - self.stamp) * self.rate)
        self.stamp = now
        if self.tokens < 1.0:
            wait = (1.0 - self.tokens) / self.rate
            await asyncio.sleep(wait)
            self.tokens = 1.0
            self.stamp = time.monotonic()
        self.tokens -= 1.0


# -- websocket framing ---------------------------------------------------------

def _ws_frame(payload: bytes, opcode: int = 0x1) -> bytes:
    """Server-to-client frame (unmasked)."""
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n < 1 << 16:
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


async def _ws_read_message(reader) -> bytes | None:
    """Read one complete (possibly fragmented) client message.

    Returns None on close/EOF; pings surface as the b"\\x09" sentinel so the
    session loop can answer with a pong.
    """
    buffer = b""
    while True:
        try:
            header = await reader.readexactly(2)
        except (asyncio.IncompleteReadError, ConnectionResetError):
            return None
        fin = header[0] & 0x80
        opcode = header[0] & 0x0F
        masked = header[1] & 0x80
        length = header[1] & 0x7F
        if length == 126:
            length = struct.unpack(">H", await reader.readexactly(2))[0]
        elif length == 127:
            length = struct.unpack(">Q", await reader.readexactly(8))[0]
        mask = await reader.readexactly(4) if masked else b""
        payload = await reader.readexactly(length) if length else b""
        if mask:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))

        if opcode == 0x8:  # close
            return None
        if opcode == 0x9:  # ping
            return b"\x09"
        if opcode == 0xA:  # pong
            continue
        buffer += payload
        if fin:
            return buffer


def make_server(port: int, config: EngineConfig | None = None,
                host: str = "127.0.0.1", static_dir: str | None = None,
                log_path: str | None = None) -> TunnelServer:
    return TunnelServer(config=config, host=host, port=port,
                        static_dir=static_dir, log_path=log_path)


def serve(port: int, config: EngineConfig | None = None, **kwargs):
    """Blocking entry point: accept sessions until interrupted."""
    make_server(port, config, **kwargs).run()


class ServerThread:
    """Run a TunnelServer on a background thread (tests, notebooks)."""

    def __init__(self, **kwargs):
        self.kwargs = kwargs
        self.server: TunnelServer | None = None
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._started = threading.Event()

    def __enter__(self) -> TunnelServer:
        self._thread = threading.Thread(target=self._main, daemon=True)
        self._thread.start()
        if not self._started.wait(10.0):
            raise RuntimeError("server failed to start")
        return self.server

    def _main(self):
        self._loop = asyncio.new_event_loop()
        asyncio.set_event_loop(self._loop)
        self.server = TunnelServer(**self.kwargs)
        self._loop.run_until_complete(self.server.start())
        self._started.set()
        try:
            self._loop.run_forever()
        finally:
            self._loop.run_until_complete(self.server.stop())
            self._loop.close()

    def __exit__(self, *exc):
        if self._loop is not None:
            self._loop.call_soon_threadsafe(self._loop.stop)
        if self._thread is not None:
            self._thread.join(10.0)
        return False

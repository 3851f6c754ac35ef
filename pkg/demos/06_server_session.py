"""A complete wire-protocol session against a live server.

Starts the server on a free port, speaks the line-JSON protocol like a
headset client would: calibrate, select, set the tunnel size, start, stream
samples, stop, and read the summary.
"""

import json
import socket
import tempfile

import numpy as np

from tunneltrainer.config import default_config
from tunneltrainer.server import ServerThread

with tempfile.TemporaryDirectory() as tmp:
    with ServerThread(config=default_config(), port=0,
                      log_path=f"{tmp}/session.jsonl") as server:
        sock = socket.create_connection(("127.0.0.1", server.port))
        rw = sock.makefile("rwb")

        def send(obj):
            rw.write((json.dumps(obj) + "\n").encode())
            rw.flush()

        def recv():
            return json.loads(rw.readline())

        for p in ([0, 0, 0], [1, 0, 0], [0, 1, 0]):
            send({"type": "command", "action": "calibrate", "args": {"pos_m": p}})
        send({"type": "command", "action": "select", "args": {"id": "T1"}})
        send({"type": "command", "action": "set_ci", "args": {"ci": "C2"}})
        send({"type": "command", "action": "start", "args": {}})
        snapshot = recv()
        print("tunnel snapshot:", len(snapshot["spheres"]), "red spheres")

        # one out-and-back stroke along the tunnel with a small wobble
        for i, u in enumerate(np.linspace(0, 1, 80)):
            x = 0.3 * (1 - abs(2 * u - 1))
            send({"type": "hand_sample", "t_ms": i * 16.0,
                  "pos_m": [x, 0.004 * np.sin(12 * u), 0.0]})
            frame = recv()
        print("last live error: %.2f cm" % (frame["current_error_m"] * 100))

        send({"type": "command", "action": "stop", "args": {}})
        summary = recv()
        print("summary:", summary["repetition_count"], "repetition(s),",
              len(summary["tracked_path"]), "tracked samples")
        if summary["error"]:
            print("task error: %.2f cm" % (summary["error"]["err"] * 100))
        sock.close()

"""Socket service exposing the simulated lab over the wire protocol."""

from __future__ import annotations

import logging
import socketserver
import threading

from .config import LabConfig
from .instruments import LabError, qubit_sequence, vna_sweep
from .wire import FrameError, read_frame, send_frame

logger = logging.getLogger(__name__)


def handle_request(obj: dict, config: LabConfig) -> dict:
    op = obj.get("op")
    try:
        if op == "sweep":
            return {"ok": True, **vna_sweep(obj, config)}
        if op == "sequence":
            return {"ok": True, **qubit_sequence(obj, config.qubit)}
        raise LabError("bad_request", f"unknown op {op!r}")
    except LabError as exc:
        return {"ok": False, "code": exc.code, "message": exc.message}


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        while True:
            try:
                obj = read_frame(self.request)
            except FrameError as exc:
                # Malformed frame: report and keep the connection open.
                send_frame(self.request,
                           {"ok": False, "code": "bad_request",
                            "message": str(exc)})
                continue
            except (ConnectionError, OSError):
                return
            if obj is None:
                return
            reply = handle_request(obj, self.server.lab_config)
            try:
                send_frame(self.request, reply)
            except OSError:
                return


class LabServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: LabConfig, host="127.0.0.1", port=0):
        super().__init__((host, port), _Handler)
        self.lab_config = config


def serve(config: LabConfig, endpoint=("127.0.0.1", 0)) -> LabServer:
    """Start the lab service on a background thread; caller owns shutdown."""
    server = LabServer(config, endpoint[0], endpoint[1])
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    logger.info("lab service listening on %s:%d", *server.server_address)
    return server

"""Lab access adapters: in-process calls or the socket protocol.

Both present the same two methods, so the runtime's lab builtins do not
care whether the instruments live in this process or behind the service.
"""

from __future__ import annotations

import socket

from .config import LabConfig
from .instruments import LabError, qubit_sequence, vna_sweep
from .wire import read_frame, send_frame


class InProcessLab:
    """Direct calls against a LabConfig (no sockets)."""

    def __init__(self, config: LabConfig):
        self.config = config

    def sweep(self, request: dict) -> dict:
        return vna_sweep(request, self.config)

    def sequence(self, request: dict) -> dict:
        return qubit_sequence(request, self.config.qubit)

    def close(self):
        pass


class RemoteLab:
    """Framed-socket client for a served lab."""

    def __init__(self, host: str, port: int, timeout=30.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)

    def _call(self, request: dict) -> dict:
        send_frame(self._sock, request)
        reply = read_frame(self._sock)
        if reply is None:
            raise ConnectionError("lab service closed the connection")
        if not reply.get("ok"):
            raise LabError(reply.get("code", "error"),
                           reply.get("message", "lab request failed"))
        reply.pop("ok", None)
        return reply

    def sweep(self, request: dict) -> dict:
        return self._call({"op": "sweep", **request})

    def sequence(self, request: dict) -> dict:
        return self._call({"op": "sequence", **request})

    def close(self):
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def connect(endpoint: str) -> RemoteLab:
    """Open a lab connection from a "host:port" endpoint string."""
    host, _, port = endpoint.rpartition(":")
    return RemoteLab(host or "127.0.0.1", int(port))

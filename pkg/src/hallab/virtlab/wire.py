"""Length-prefixed JSON framing over a stream socket.

One frame = u32 big-endian payload length + UTF-8 JSON object.
"""

from __future__ import annotations

import json
import struct

MAX_FRAME_BYTES = 64 * 1024 * 1024


class FrameError(Exception):
    pass


def encode_frame(obj) -> bytes:
    payload = json.dumps(obj, separators=(",", ":")).encode("utf-8")
    if len(payload) > MAX_FRAME_BYTES:
        raise FrameError("frame too large")
    return struct.pack(">I", len(payload)) + payload


def decode_frame(data: bytes):
    """Decode one complete frame; returns (obj, bytes consumed)."""
    if len(data) < 4:
        raise FrameError("truncated length prefix")
    (length,) = struct.unpack(">I", data[:4])
    if length > MAX_FRAME_BYTES:
        raise FrameError("frame too large")
    if len(data) < 4 + length:
        raise FrameError("truncated payload")
    try:
        obj = json.loads(data[4:4 + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"payload is not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FrameError("frame payload must be a JSON object")
    return obj, 4 + length


def recv_exact(sock, count: int) -> bytes:
    chunks = []
    remaining = count
    while remaining > 0:
        chunk = sock.recv(remaining)
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(sock):
    """Read one frame from a socket; None on clean EOF at a boundary."""
    header = sock.recv(4)
    if not header:
        return None
    if len(header) < 4:
        header += recv_exact(sock, 4 - len(header))
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME_BYTES:
        raise FrameError("frame too large")
    payload = recv_exact(sock, length)
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"payload is not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FrameError("frame payload must be a JSON object")
    return obj


def send_frame(sock, obj):
    sock.sendall(encode_frame(obj))

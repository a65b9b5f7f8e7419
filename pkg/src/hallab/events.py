"""Append-only per-session event stream with cursor reads.

Events are immutable once emitted and sequence numbers are gapless, so
replaying a stream reconstructs the session history exactly. Readers poll
with a cursor; ``since`` optionally blocks until new events arrive.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass

EVENT_KINDS = frozenset({
    "user_input", "query_answer", "plan", "code", "execution_started",
    "signal", "error", "done", "state_patch",
})


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    payload: dict
    timestamp: float

    def as_dict(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload,
                "timestamp": self.timestamp}


class EventLog:
    """Thread-safe ordered event sink.

    ``clock`` is injectable so that scripted runs produce byte-identical
    logs; the default is wall time.
    """

    def __init__(self, clock=time.time):
        self._events: list[Event] = []
        self._clock = clock
        self._cond = threading.Condition()

    def append(self, kind: str, payload: dict) -> Event:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._cond:
            event = Event(seq=len(self._events) + 1, kind=kind,
                          payload=payload, timestamp=float(self._clock()))
            self._events.append(event)
            self._cond.notify_all()
        return event

    def __len__(self) -> int:
        with self._cond:
            return len(self._events)

    def snapshot(self) -> list:
        with self._cond:
            return list(self._events)

    def since(self, seq: int, timeout_ms: int = 0) -> list:
        """Events with sequence beyond ``seq``; blocks up to ``timeout_ms``
        when none are available yet."""
        deadline = time.monotonic() + timeout_ms / 1000.0
        with self._cond:
            while len(self._events) <= seq:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._cond.wait(remaining)
            return self._events[seq:]

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e.as_dict(), sort_keys=True)
                         for e in self.snapshot()) + "\n"


def counting_clock(start: float = 0.0, step: float = 1.0):
    """Deterministic clock for reproducible logs."""
    counter = {"t": start - step}
    lock = threading.Lock()

    def clock():
        with lock:
            counter["t"] += step
            return counter["t"]

    return clock

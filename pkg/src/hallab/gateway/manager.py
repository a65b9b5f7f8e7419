"""Session manager: the stateful core behind the HTTP API.

Owns the shared knowledge base and dataset storage, registers sessions,
and serializes each session's progress through a per-session worker lock.
Scripted sessions replay bundle transcripts; inputs posted while a step is
pending queue up and feed the cycle that starts after the next approval.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field

from ..engine import ConflictError, approve_step, run_cycle
from ..kb import KnowledgeBase, memorize
from ..scenarios import ScenarioError, build_report, load_bundle, prepare_rig
from ..scenarios.runners import SessionRig, run_knowledge_prep
from ..virtlab import Storage, connect


class UnknownSessionError(KeyError):
    pass


@dataclass
class SessionHandle:
    rig: SessionRig
    lock: threading.Lock = field(default_factory=threading.Lock)
    queue: deque = field(default_factory=deque)


class SessionManager:
    """Multiplexes sessions over one knowledge base and storage root."""

    def __init__(self, storage_root, max_auto_cycles: int = 50):
        self.storage = Storage(storage_root)
        self.kb = KnowledgeBase()
        self.max_auto_cycles = max_auto_cycles
        self._handles: dict[str, SessionHandle] = {}
        self._lock = threading.Lock()

    # -- lifecycle -----------------------------------------------------------

    def create_session(self, mode="auto", model_ref="", lab_endpoint=None,
                       seed=0, run_prep=True) -> str:
        if mode not in ("auto", "manual"):
            raise ValueError(f"unknown mode {mode!r}")
        if model_ref.startswith("scripted:"):
            bundle = load_bundle(model_ref.split(":", 1)[1])
        elif model_ref == "remote":
            raise ValueError(
                "remote sessions need a scenario-free setup; not supported "
                "by this manager build")
        else:
            raise ValueError(f"unknown model_ref {model_ref!r}")

        lab = connect(lab_endpoint) if lab_endpoint else None
        session_id = self._unique_id(f"{bundle.name}-s{seed}")
        rig = prepare_rig(bundle, seed=seed, storage=self.storage, mode=mode,
                          lab=lab, kb=self.kb, session_id=session_id)
        if run_prep and bundle.knowledge_prep:
            run_knowledge_prep(rig)
        with self._lock:
            self._handles[session_id] = SessionHandle(rig=rig)
        return session_id

    def _unique_id(self, base: str) -> str:
        with self._lock:
            if base not in self._handles:
                return base
            n = 2
            while f"{base}-{n}" in self._handles:
                n += 1
            return f"{base}-{n}"

    def _handle(self, session_id: str) -> SessionHandle:
        try:
            return self._handles[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def list_sessions(self) -> list:
        with self._lock:
            handles = list(self._handles.items())
        return [{
            "id": sid,
            "mode": h.rig.session.mode,
            "cycles": len(h.rig.session.history),
            "done": h.rig.session.done,
            "scenario": h.rig.bundle.name,
        } for sid, h in handles]

    # -- driving -------------------------------------------------------------

    def post_input(self, session_id: str, text: str) -> dict:
        if not text or not text.strip():
            raise ValueError("empty input")
        handle = self._handle(session_id)
        with handle.lock:
            handle.queue.append(text)
            rig = handle.rig
            if rig.session.mode == "manual":
                record = rig.session.history[-1] if rig.session.history else None
                if record is not None and record.status == "pending_approval":
                    return {"queued": True, "done": rig.session.done}
                self._step(handle)
            else:
                self._drain_auto(handle)
            return {"queued": False, "done": rig.session.done}

    def _step(self, handle: SessionHandle):
        text = handle.queue.popleft() if handle.queue else None
        rig = handle.rig
        run_cycle(rig.session, rig.kb, rig.env, rig.model, text)

    def _drain_auto(self, handle: SessionHandle):
        for _ in range(self.max_auto_cycles):
            session = handle.rig.session
            if session.done and not handle.queue:
                return
            if not handle.queue and not session.done:
                # A scripted replay shows where the recorded run waited for
                # the operator: stop there until that input is posted.
                if getattr(handle.rig.model, "next_role", None) == "preprocess":
                    return
            self._step(handle)
        raise ScenarioError("auto session exceeded the cycle budget")

    def approve(self, session_id: str, cycle_index: int) -> dict:
        handle = self._handle(session_id)
        with handle.lock:
            rig = handle.rig
            record = approve_step(rig.session, rig.env, cycle_index)
            # Plan the next step; a queued operator input feeds it.
            if not rig.session.done:
                self._step(handle)
            return {"record": record.as_dict(), "done": rig.session.done}

    def memorize_step(self, session_id: str, cycle_index: int,
                      title: str) -> str:
        handle = self._handle(session_id)
        with handle.lock:
            return memorize(self.kb, handle.rig.session, cycle_index, title)

    # -- reads ----------------------------------------------------------------

    def events(self, session_id: str, since: int = 0,
               timeout_ms: int = 0) -> list:
        return self._handle(session_id).rig.session.events.since(
            since, timeout_ms)

    def state(self, session_id: str) -> dict:
        handle = self._handle(session_id)
        with handle.lock:
            from ..runtime import snapshot_state

            return snapshot_state(handle.rig.env)

    def report(self, session_id: str) -> dict:
        handle = self._handle(session_id)
        with handle.lock:
            return build_report(handle.rig)

    def cycle_record(self, session_id: str, cycle_index: int) -> dict:
        handle = self._handle(session_id)
        record = handle.rig.session.record(cycle_index)
        if record is None:
            raise ConflictError(f"no cycle {cycle_index}")
        return record.as_dict()

"""Session and cycle records: the short-term context."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..events import EventLog

STATUSES = ("planned", "developed", "pending_approval", "executed", "failed")


@dataclass
class CycleRecord:
    index: int
    user_input: str | None = None
    prompt: str = ""
    signal_description: str = ""
    script_source: str = ""
    signal_value: str | None = None
    status: str = "planned"

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "user_input": self.user_input,
            "prompt": self.prompt,
            "signal_description": self.signal_description,
            "script_source": self.script_source,
            "signal_value": self.signal_value,
            "status": self.status,
        }


@dataclass
class Session:
    id: str
    mode: str = "auto"  # auto | manual
    history: list = field(default_factory=list)
    done: bool = False
    objective: str = ""
    events: EventLog = field(default_factory=EventLog)

    def next_index(self) -> int:
        return len(self.history) + 1

    def record(self, index: int) -> CycleRecord | None:
        if 1 <= index <= len(self.history):
            return self.history[index - 1]
        return None


def replay_history(events) -> list:
    """Rebuild the cycle records from an event stream.

    Inverse of the engine's event emission: plan/code/signal/error events
    carry everything a CycleRecord holds, so a replayed stream reconstructs
    the history exactly. A cycle with code but no outcome is at rest only
    while awaiting approval.
    """
    records: dict[int, CycleRecord] = {}
    for event in events:
        kind = event.kind
        payload = event.payload
        cycle = payload.get("cycle")
        if kind == "plan":
            records[cycle] = CycleRecord(
                index=cycle,
                user_input=payload.get("user_input"),
                prompt=payload["prompt"],
                signal_description=payload["signal_description"],
            )
        elif kind == "code":
            records[cycle].script_source = payload["source"]
            records[cycle].status = "pending_approval"
        elif kind == "signal":
            records[cycle].signal_value = payload["value"]
            records[cycle].status = "executed"
        elif kind == "error":
            records[cycle].signal_value = payload["signal"]
            records[cycle].status = "failed"
    return [records[i] for i in sorted(records)]


def history_digest(session: Session, keep_scripts: int = 3) -> str:
    """Step history for the planner.

    Prompts, signal descriptions, and signal values are always included in
    full; script sources older than the last ``keep_scripts`` cycles
    collapse to a one-line note to keep the digest focused.
    """
    lines = []
    cutoff = len(session.history) - keep_scripts
    for i, rec in enumerate(session.history):
        lines.append(f"== Cycle {rec.index} [{rec.status}]")
        if rec.user_input:
            lines.append(f"user input: {rec.user_input}")
        lines.append(f"prompt: {rec.prompt}")
        lines.append(f"expected signal: {rec.signal_description}")
        if rec.script_source:
            if i < cutoff:
                n = len(rec.script_source.splitlines())
                lines.append(f"script: [elided, {n} lines, "
                             f"runnable via invoke(\"step-{rec.index}\")]")
            else:
                lines.append("script:")
                lines.append(rec.script_source.rstrip())
        if rec.signal_value is not None:
            lines.append(f"signal: {rec.signal_value}")
        lines.append("")
    return "\n".join(lines)

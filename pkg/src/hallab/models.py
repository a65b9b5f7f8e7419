"""Model adapters: the text-generation boundary of the whole system.

Every LLM-shaped decision flows through ``ModelAdapter.generate``. Two
implementations ship: a deterministic transcript replayer for tests and
scenarios, and an HTTP client for a real endpoint. Nothing in the test
suite ever calls a live model.
"""

from __future__ import annotations

import json
import os
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

ROLES = ("preprocess", "plan", "develop", "search", "answer")

# plan/develop reason hard; preprocess/search are routine. answer defaults
# low and is raised to high only for knowledge preparation.
_ROLE_THINKING = {"preprocess": "low", "plan": "high", "develop": "high",
                  "search": "low", "answer": "low"}


class ProtocolError(Exception):
    """Model reply did not follow the expected structure."""


class ScriptedModelMismatch(AssertionError):
    """Transcript replay diverged from the live request stream."""


@dataclass
class ModelRequest:
    role: str
    instructions: str
    context_documents: list = field(default_factory=list)
    history_digest: str = ""
    thinking: str = ""

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown model role {self.role!r}")
        if not self.thinking:
            self.thinking = _ROLE_THINKING[self.role]

    def render(self) -> str:
        """Flat text form: what an endpoint receives and matchers scan."""
        parts = [f"ROLE: {self.role}", f"THINKING: {self.thinking}",
                 "", self.instructions]
        if self.context_documents:
            parts.append("")
            parts.append("CONTEXT DOCUMENTS:")
            for doc in self.context_documents:
                parts.append(f"--- {doc.id}: {doc.title} [{doc.kind}]")
                parts.append(doc.body)
        if self.history_digest:
            parts.extend(["", "HISTORY:", self.history_digest])
        return "\n".join(parts)


class ScriptedModel:
    """Replays an ordered transcript of (role, match, reply) entries.

    Each generate() consumes the next entry; the entry's role must equal
    the request role and its match string must occur in the rendered
    request, otherwise the replay fails loudly.
    """

    def __init__(self, entries, name="scripted"):
        self.entries = list(entries)
        self.name = name
        self._cursor = 0

    @classmethod
    def from_file(cls, path) -> "ScriptedModel":
        path = Path(path)
        return cls(parse_transcript(path.read_text(encoding="utf-8")),
                   name=path.stem)

    @property
    def remaining(self) -> int:
        return len(self.entries) - self._cursor

    @property
    def next_role(self) -> str | None:
        """Role of the next entry; lets a replay driver see where the
        recorded interaction waited for operator input."""
        if self._cursor >= len(self.entries):
            return None
        return self.entries[self._cursor][0]

    def generate(self, request: ModelRequest) -> str:
        if self._cursor >= len(self.entries):
            raise ScriptedModelMismatch(
                f"transcript {self.name!r} exhausted on a {request.role} request")
        role, match, reply = self.entries[self._cursor]
        self._cursor += 1
        if role != request.role:
            raise ScriptedModelMismatch(
                f"transcript {self.name!r} entry {self._cursor} expects role "
                f"{role!r}, got {request.role!r}")
        if match and match not in request.render():
            raise ScriptedModelMismatch(
                f"transcript {self.name!r} entry {self._cursor} matcher "
                f"{match!r} not found in the {request.role} request")
        return reply


def parse_transcript(text: str) -> list:
    """Transcript format: records separated by lines of ---; each record has
    ``role:`` and ``match:`` header lines, then ``reply:`` followed by
    verbatim reply text up to the next separator."""
    entries = []
    for chunk in text.split("\n---"):
        chunk = chunk.strip("\n")
        if chunk.startswith("---"):
            chunk = chunk[3:]
        if not chunk.strip():
            continue
        lines = chunk.split("\n")
        role = match = None
        reply_lines = None
        for i, line in enumerate(lines):
            if reply_lines is not None:
                reply_lines.append(line)
            elif line.startswith("role:"):
                role = line[len("role:"):].strip()
            elif line.startswith("match:"):
                match = line[len("match:"):].strip()
            elif line.startswith("reply:"):
                reply_lines = []
                tail = line[len("reply:"):].lstrip()
                if tail:
                    reply_lines.append(tail)
        if role is None or reply_lines is None:
            raise ValueError(f"malformed transcript record: {chunk[:80]!r}")
        entries.append((role, match or "", "\n".join(reply_lines).strip("\n")))
    return entries


class RemoteModel:
    """HTTP client for a hosted text-generation endpoint.

    Configured by environment variables (endpoint URL, model name, and the
    NAME of the variable holding the API key). Not exercised by any test
    that needs a live service; kept deliberately tiny.
    """

    ENDPOINT_VAR = "HAL_MODEL_ENDPOINT"
    NAME_VAR = "HAL_MODEL_NAME"
    KEY_VAR_VAR = "HAL_MODEL_API_KEY_VAR"

    def __init__(self, endpoint=None, model_name=None, api_key=None,
                 timeout=120.0):
        self.endpoint = endpoint or os.environ.get(self.ENDPOINT_VAR)
        if not self.endpoint:
            raise ValueError(f"{self.ENDPOINT_VAR} is not configured")
        self.model_name = model_name or os.environ.get(self.NAME_VAR, "")
        if api_key is None:
            key_var = os.environ.get(self.KEY_VAR_VAR, "")
            api_key = os.environ.get(key_var, "") if key_var else ""
        self.api_key = api_key
        self.timeout = timeout

    def generate(self, request: ModelRequest) -> str:
        body = json.dumps({
            "model": self.model_name,
            "thinking": request.thinking,
            "input": request.render(),
        }).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=body, headers=headers)
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
        if "output" not in payload:
            raise ProtocolError("endpoint reply missing 'output'")
        return str(payload["output"])

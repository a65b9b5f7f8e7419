"""Execution environment: STATE blackboard, script registry, capabilities."""

from __future__ import annotations

import copy
import hashlib
import math
from dataclasses import dataclass, field

from .errors import RegistryError, ScriptError
from .parser import parse
from .pretty import pretty_print

ALL_CAPABILITIES = frozenset({"core", "lab", "storage", "analysis"})
SIGNAL_KEY = "__signal__"


@dataclass
class Script:
    source: str
    ast: object = None
    registered_id: str | None = None

    def __post_init__(self):
        if self.ast is None:
            self.ast = parse(self.source)

    def pretty(self) -> str:
        return pretty_print(self.ast)


@dataclass
class Budget:
    max_steps: int = 2_000_000
    max_wall_ms: int = 60_000
    max_invoke_depth: int = 8


@dataclass
class Environment:
    """Per-session sandbox state, persistent across executions."""

    state: dict = field(default_factory=dict)
    registry: dict = field(default_factory=dict)
    capabilities: frozenset = ALL_CAPABILITIES
    budget: Budget = field(default_factory=Budget)
    session_id: str = "session"
    base_seed: int = 0
    lab: object = None       # adapter with .sweep/.sequence, set by the host
    storage: object = None   # virtlab.Storage, set by the host
    kb: object = None        # knowledge base for invoke-by-example, optional
    lab_call_index: int = 0

    def next_lab_seeds(self, purpose: str = "") -> int:
        """Deterministic per-call seed derived from the session seed."""
        digest = hashlib.blake2b(
            f"{self.base_seed}:{self.lab_call_index}:{purpose}".encode(),
            digest_size=8).digest()
        self.lab_call_index += 1
        return int.from_bytes(digest, "little")


def ensure_finite(value, line=0, path="STATE"):
    """Reject NaN/Inf anywhere inside a value written to the blackboard."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ScriptError("type", f"non-finite number written to {path}",
                              line)
        return
    if isinstance(value, int):
        return
    if isinstance(value, list):
        for i, item in enumerate(value):
            ensure_finite(item, line, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            ensure_finite(item, line, f"{path}[{key!r}]")
        return
    raise ScriptError("type", f"unsupported value type {type(value).__name__}",
                      line)


def register(env: Environment, script_id: str, script: Script):
    if script_id in env.registry:
        raise RegistryError(f"script id {script_id!r} already registered")
    script.registered_id = script_id
    env.registry[script_id] = script


def snapshot_state(env: Environment) -> dict:
    return copy.deepcopy(env.state)


def patch_state(env: Environment, patch: dict):
    """Shallow merge: top-level keys overwrite existing entries."""
    for key, value in patch.items():
        if not isinstance(key, str):
            raise ScriptError("type", "STATE keys must be strings")
        ensure_finite(value, path=f"STATE[{key!r}]")
        env.state[key] = value

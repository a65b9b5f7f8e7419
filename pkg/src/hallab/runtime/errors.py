"""Errors raised by the experiment-script runtime."""

from __future__ import annotations


class DslSyntaxError(Exception):
    """Source text does not match the grammar."""

    def __init__(self, message: str, line: int, col: int, expected: str = ""):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected


class ScriptError(Exception):
    """Runtime failure inside a script.

    ``kind`` is one of: type, name, capability, budget, builtin.
    """

    def __init__(self, kind: str, message: str, line: int = 0):
        super().__init__(f"{kind} error at line {line}: {message}")
        self.kind = kind
        self.message = message
        self.line = line

    def as_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "line": self.line}


class RegistryError(Exception):
    """Duplicate script id in the per-session registry."""

"""Sandboxed experiment-script runtime: parser, interpreter, builtins."""

from .builtins import default_builtins, extract_script_block
from .environment import (ALL_CAPABILITIES, SIGNAL_KEY, Budget, Environment,
                          Script, ensure_finite, patch_state, register,
                          snapshot_state)
from .errors import DslSyntaxError, RegistryError, ScriptError
from .interp import ExecutionResult, execute, format_value
from .parser import parse
from .pretty import pretty_print

__all__ = [
    "ALL_CAPABILITIES", "Budget", "DslSyntaxError", "Environment",
    "ExecutionResult", "RegistryError", "SIGNAL_KEY", "Script", "ScriptError",
    "default_builtins", "ensure_finite", "execute", "extract_script_block",
    "format_value", "parse", "patch_state", "pretty_print", "register",
    "snapshot_state",
]

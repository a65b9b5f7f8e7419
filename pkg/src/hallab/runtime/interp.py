"""Tree-walking interpreter for the experiment-scripting language.

Scripts touch the outside world only through builtins; locals are fresh per
execution while STATE persists on the environment. Every node evaluation
costs one budget step and errors abort the script at the failing statement,
keeping whatever STATE mutations already happened.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .ast_nodes import (Assign, BinOp, Call, ExprStmt, For, If, Index,
                        ListLit, Literal, MapLit, Name, Program, UnaryOp,
                        While)
from .environment import SIGNAL_KEY, Environment, Script, ensure_finite
from .errors import ScriptError

_WALL_CHECK_MASK = 0xFFF


@dataclass
class ExecutionResult:
    signal: str | None
    log: list
    error: dict | None
    steps_used: int

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class _Context:
    env: Environment
    log: list = field(default_factory=list)
    steps: int = 0
    deadline: float = 0.0
    depth: int = 0

    def charge(self, line: int):
        self.steps += 1
        if self.steps > self.env.budget.max_steps:
            raise ScriptError("budget", "evaluation step budget exceeded", line)
        if (self.steps & _WALL_CHECK_MASK) == 0 and time.monotonic() > self.deadline:
            raise ScriptError("budget", "wall-clock budget exceeded", line)


def format_value(value) -> str:
    """Human-readable stringification used by str() and SIGNAL."""
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, float):
        if math.isfinite(value) and value == int(value) and abs(value) < 1e16:
            return str(int(value))
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return "[" + ", ".join(_format_nested(v) for v in value) + "]"
    if isinstance(value, dict):
        inner = ", ".join(f'"{k}": {_format_nested(v)}'
                          for k, v in value.items())
        return "{" + inner + "}"
    return str(value)


def _format_nested(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return format_value(value)


def type_name(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    return {str: "string", list: "list", dict: "map"}.get(type(value),
                                                          type(value).__name__)


class Interpreter:
    def __init__(self, ctx: _Context, builtins: dict):
        self.ctx = ctx
        self.env = ctx.env
        self.builtins = builtins

    # statements

    def run_block(self, stmts, scope: dict):
        for stmt in stmts:
            self.exec_stmt(stmt, scope)

    def exec_stmt(self, stmt, scope: dict):
        self.ctx.charge(stmt.line)
        if isinstance(stmt, Assign):
            self._assign(stmt, scope)
        elif isinstance(stmt, ExprStmt):
            self.eval_expr(stmt.expr, scope)
        elif isinstance(stmt, If):
            for cond, block in stmt.branches:
                if self._truth(cond, scope):
                    self.run_block(block, scope)
                    return
            if stmt.orelse is not None:
                self.run_block(stmt.orelse, scope)
        elif isinstance(stmt, While):
            while self._truth(stmt.cond, scope):
                self.run_block(stmt.body, scope)
        elif isinstance(stmt, For):
            items = self.eval_expr(stmt.iterable, scope)
            if not isinstance(items, list):
                raise ScriptError("type",
                                  f"cannot iterate over {type_name(items)}",
                                  stmt.line)
            for item in items:
                self.ctx.charge(stmt.line)
                scope[stmt.var] = item
                self.run_block(stmt.body, scope)
        else:
            raise ScriptError("type", "unknown statement", stmt.line)

    def _truth(self, cond, scope) -> bool:
        value = self.eval_expr(cond, scope)
        if not isinstance(value, bool):
            raise ScriptError("type",
                              f"condition must be boolean, got {type_name(value)}",
                              cond.line)
        return value

    def _assign(self, stmt: Assign, scope: dict):
        value = self.eval_expr(stmt.value, scope)
        target = stmt.target
        if isinstance(target, Name):
            if target.ident in ("STATE", "SIGNAL"):
                raise ScriptError("type",
                                  f"cannot rebind reserved name {target.ident}",
                                  stmt.line)
            scope[target.ident] = value
            return
        container = self.eval_expr(target.obj, scope)
        key = self.eval_expr(target.index, scope)
        if self._roots_in_state(target, scope):
            ensure_finite(value, stmt.line)
        if isinstance(container, dict):
            if not isinstance(key, str):
                raise ScriptError("type", "map keys must be strings", stmt.line)
            container[key] = value
        elif isinstance(container, list):
            idx = self._list_index(container, key, stmt.line)
            container[idx] = value
        else:
            raise ScriptError("type",
                              f"cannot index into {type_name(container)}",
                              stmt.line)

    def _roots_in_state(self, target: Index, scope) -> bool:
        node = target
        while isinstance(node, Index):
            node = node.obj
        if isinstance(node, Name):
            if node.ident == "STATE":
                return True
            # Root variable may alias a container stored in STATE; checking
            # the final value at execute() exit covers those writes.
        return False

    # expressions

    def eval_expr(self, node, scope):
        self.ctx.charge(node.line)
        if isinstance(node, Literal):
            return node.value
        if isinstance(node, Name):
            return self._lookup(node, scope)
        if isinstance(node, ListLit):
            return [self.eval_expr(i, scope) for i in node.items]
        if isinstance(node, MapLit):
            return {k: self.eval_expr(v, scope) for k, v in node.pairs}
        if isinstance(node, Index):
            return self._index(node, scope)
        if isinstance(node, Call):
            return self._call(node, scope)
        if isinstance(node, UnaryOp):
            return self._unary(node, scope)
        if isinstance(node, BinOp):
            return self._binop(node, scope)
        raise ScriptError("type", "unknown expression", node.line)

    def _lookup(self, node: Name, scope):
        if node.ident == "STATE":
            return self.env.state
        if node.ident in scope:
            return scope[node.ident]
        raise ScriptError("name", f"undefined name {node.ident!r}", node.line)

    def _index(self, node: Index, scope):
        container = self.eval_expr(node.obj, scope)
        key = self.eval_expr(node.index, scope)
        if isinstance(container, dict):
            if not isinstance(key, str):
                raise ScriptError("type", "map keys must be strings", node.line)
            if key not in container:
                raise ScriptError("name", f"missing map key {key!r}", node.line)
            return container[key]
        if isinstance(container, (list, str)):
            idx = self._list_index(container, key, node.line)
            return container[idx]
        raise ScriptError("type", f"cannot index into {type_name(container)}",
                          node.line)

    def _list_index(self, container, key, line) -> int:
        if isinstance(key, bool) or not isinstance(key, (int, float)):
            raise ScriptError("type", "index must be a number", line)
        if float(key) != int(key):
            raise ScriptError("type", "index must be an integer", line)
        idx = int(key)
        if idx < 0:
            idx += len(container)
        if not 0 <= idx < len(container):
            raise ScriptError("type", f"index {int(key)} out of range", line)
        return idx

    def _call(self, node: Call, scope):
        if not isinstance(node.callee, Name):
            raise ScriptError("type", "only builtins are callable", node.line)
        name = node.callee.ident
        entry = self.builtins.get(name)
        if entry is None:
            if name in scope or name == "STATE":
                raise ScriptError("type", f"{name!r} is not callable", node.line)
            raise ScriptError("name", f"unknown builtin {name!r}", node.line)
        group, fn = entry
        if group != "always" and group not in self.env.capabilities:
            raise ScriptError(
                "capability",
                f"builtin {name!r} requires disabled capability {group!r}",
                node.line)
        args = [self.eval_expr(a, scope) for a in node.args]
        return fn(self, node.line, args)

    def _unary(self, node: UnaryOp, scope):
        value = self.eval_expr(node.operand, scope)
        if node.op == "-":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScriptError("type", f"cannot negate {type_name(value)}",
                                  node.line)
            return -float(value)
        if not isinstance(value, bool):
            raise ScriptError("type", f"'not' needs a boolean, got {type_name(value)}",
                              node.line)
        return not value

    def _binop(self, node: BinOp, scope):
        op = node.op
        if op in ("and", "or"):
            left = self.eval_expr(node.left, scope)
            if not isinstance(left, bool):
                raise ScriptError("type", f"'{op}' needs booleans", node.line)
            if op == "and" and not left:
                return False
            if op == "or" and left:
                return True
            right = self.eval_expr(node.right, scope)
            if not isinstance(right, bool):
                raise ScriptError("type", f"'{op}' needs booleans", node.line)
            return right

        left = self.eval_expr(node.left, scope)
        right = self.eval_expr(node.right, scope)
        if op == "==":
            return self._equal(left, right)
        if op == "!=":
            return not self._equal(left, right)
        if op in ("<", "<=", ">", ">="):
            return self._compare(op, left, right, node.line)
        return self._arith(op, left, right, node.line)

    @staticmethod
    def _equal(left, right) -> bool:
        if isinstance(left, bool) != isinstance(right, bool):
            return False
        if isinstance(left, (int, float)) and isinstance(right, (int, float)):
            return float(left) == float(right)
        if type(left) is not type(right):
            return False
        return left == right

    def _compare(self, op, left, right, line):
        num = (lambda v: isinstance(v, (int, float))
               and not isinstance(v, bool))
        if num(left) and num(right):
            a, b = float(left), float(right)
        elif isinstance(left, str) and isinstance(right, str):
            a, b = left, right
        else:
            raise ScriptError(
                "type",
                f"cannot order {type_name(left)} and {type_name(right)}", line)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]

    def _arith(self, op, left, right, line):
        if op == "+":
            if isinstance(left, str) and isinstance(right, str):
                return left + right
            if isinstance(left, list) and isinstance(right, list):
                return left + right
        num = (lambda v: isinstance(v, (int, float))
               and not isinstance(v, bool))
        if not (num(left) and num(right)):
            raise ScriptError(
                "type",
                f"cannot apply {op!r} to {type_name(left)} and {type_name(right)}",
                line)
        a, b = float(left), float(right)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise ScriptError("type", "division by zero", line)
            return a / b
        if op == "%":
            if b == 0.0:
                raise ScriptError("type", "modulo by zero", line)
            return math.fmod(a, b)
        raise ScriptError("type", f"unknown operator {op!r}", line)


def run_nested(interp: Interpreter, program: Program, line: int):
    """Execute another script inside the same context (invoke)."""
    ctx = interp.ctx
    if ctx.depth + 1 > ctx.env.budget.max_invoke_depth:
        raise ScriptError("budget", "invoke depth exceeded", line)
    ctx.depth += 1
    try:
        interp.run_block(program.body, {})
    finally:
        ctx.depth -= 1


def execute(script: Script, env: Environment, builtins: dict | None = None) -> ExecutionResult:
    """Run a script to completion or first error.

    The reserved signal key is read from STATE at exit and cleared; STATE
    mutations persist on ``env`` either way.
    """
    from .builtins import default_builtins  # late import to avoid a cycle

    if builtins is None:
        builtins = default_builtins()
    ctx = _Context(env=env,
                   deadline=time.monotonic() + env.budget.max_wall_ms / 1000.0)
    interp = Interpreter(ctx, builtins)
    error = None
    try:
        interp.run_block(script.ast.body, {})
        ensure_finite(env.state)  # cycle-boundary invariant, aliases included
    except ScriptError as exc:
        error = exc.as_dict()

    signal = None
    if SIGNAL_KEY in env.state:
        signal = env.state.pop(SIGNAL_KEY)
        if not isinstance(signal, str):
            signal = format_value(signal)
    return ExecutionResult(signal=signal, log=ctx.log, error=error,
                           steps_used=ctx.steps)

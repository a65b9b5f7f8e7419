"""Canonical pretty-printer; its output re-parses to an identical AST."""

from __future__ import annotations

import json

from .ast_nodes import (Assign, BinOp, Call, ExprStmt, For, If, Index,
                        ListLit, Literal, MapLit, Name, Program, UnaryOp,
                        While)

_PRECEDENCE = {
    "or": 1, "and": 2,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_NONASSOC = frozenset({"==", "!=", "<", "<=", ">", ">="})
_UNARY_PREC = {"not": 3, "-": 7}
_POSTFIX_PREC = 8


def _literal(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, float):
        return repr(value)
    return json.dumps(value)


def _expr(node, parent_prec=0) -> str:
    if isinstance(node, Literal):
        return _literal(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, ListLit):
        return "[" + ", ".join(_expr(i) for i in node.items) + "]"
    if isinstance(node, MapLit):
        inner = ", ".join(f"{json.dumps(k)}: {_expr(v)}" for k, v in node.pairs)
        return "{" + inner + "}"
    if isinstance(node, Index):
        return f"{_expr(node.obj, _POSTFIX_PREC)}[{_expr(node.index)}]"
    if isinstance(node, Call):
        args = ", ".join(_expr(a) for a in node.args)
        return f"{_expr(node.callee, _POSTFIX_PREC)}({args})"
    if isinstance(node, UnaryOp):
        prec = _UNARY_PREC[node.op]
        sep = " " if node.op == "not" else ""
        text = f"{node.op}{sep}{_expr(node.operand, prec)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        # Left associative: the right child needs a strictly higher level.
        # Comparisons do not chain in the grammar, so both sides of one
        # must bind tighter than the comparison itself.
        left_floor = prec + 1 if node.op in _NONASSOC else prec
        left = _expr(node.left, left_floor)
        right = _expr(node.right, prec + 1)
        text = f"{left} {node.op} {right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression node: {node!r}")


def _stmts(body, indent) -> list:
    pad = "    " * indent
    lines = []
    for stmt in body:
        if isinstance(stmt, Assign):
            lines.append(f"{pad}{_expr(stmt.target)} = {_expr(stmt.value)}")
        elif isinstance(stmt, ExprStmt):
            lines.append(f"{pad}{_expr(stmt.expr)}")
        elif isinstance(stmt, If):
            for k, (cond, block) in enumerate(stmt.branches):
                head = "if" if k == 0 else "} elif"
                lines.append(f"{pad}{head} {_expr(cond)} {{")
                lines.extend(_stmts(block, indent + 1))
            if stmt.orelse is not None:
                lines.append(f"{pad}}} else {{")
                lines.extend(_stmts(stmt.orelse, indent + 1))
            lines.append(f"{pad}}}")
        elif isinstance(stmt, While):
            lines.append(f"{pad}while {_expr(stmt.cond)} {{")
            lines.extend(_stmts(stmt.body, indent + 1))
            lines.append(f"{pad}}}")
        elif isinstance(stmt, For):
            lines.append(f"{pad}for {stmt.var} in {_expr(stmt.iterable)} {{")
            lines.extend(_stmts(stmt.body, indent + 1))
            lines.append(f"{pad}}}")
        else:
            raise TypeError(f"not a statement node: {stmt!r}")
    return lines


def pretty_print(program: Program) -> str:
    return "\n".join(_stmts(program.body, 0)) + "\n"

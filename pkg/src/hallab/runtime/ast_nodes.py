"""AST for the experiment-scripting language.

Node equality ignores source positions so that pretty-printed programs
compare equal to their originals.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Node:
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass
class Literal(Node):
    value: object  # None | bool | float | str


@dataclass
class Name(Node):
    ident: str


@dataclass
class ListLit(Node):
    items: list


@dataclass
class MapLit(Node):
    pairs: list  # [(str key, expr)]


@dataclass
class Index(Node):
    obj: Node
    index: Node


@dataclass
class Call(Node):
    callee: Node
    args: list


@dataclass
class UnaryOp(Node):
    op: str  # "-" | "not"
    operand: Node


@dataclass
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Assign(Node):
    target: Node  # Name | Index
    value: Node


@dataclass
class ExprStmt(Node):
    expr: Node


@dataclass
class If(Node):
    branches: list  # [(cond, [stmt])] covering if/elif
    orelse: list | None


@dataclass
class While(Node):
    cond: Node
    body: list


@dataclass
class For(Node):
    var: str
    iterable: Node
    body: list


@dataclass
class Program(Node):
    body: list

"""Recursive-descent parser for the experiment-scripting language.

Grammar (newline-terminated statements, # comments, braced blocks):

    program   := { stmt }
    stmt      := assign | exprstmt | if | while | for
    assign    := target "=" expr          target := IDENT | postfix "[" expr "]"
    if        := "if" expr block { "elif" expr block } [ "else" block ]
    while     := "while" expr block       for := "for" IDENT "in" expr block
    block     := "{" { stmt } "}"
    expr      := or ; or := and {"or" and} ; and := not {"and" not}
    not       := ["not"] cmp ; cmp := add [relop add]
    add       := mul {addop mul} ; mul := unary {mulop unary}
    unary     := ["-"] postfix
    postfix   := atom { "[" expr "]" | "(" [args] ")" }
    atom      := NUMBER | STRING | true | false | null | IDENT
               | list literal | map literal (string keys) | "(" expr ")"

``SIGNAL = expr`` is sugar for ``STATE["__signal__"] = str(expr)``.
Newlines are ignored inside parentheses, brackets, and map literals.
"""

from __future__ import annotations

from .ast_nodes import (Assign, BinOp, Call, ExprStmt, For, If, Index,
                        ListLit, Literal, MapLit, Name, Program, UnaryOp,
                        While)
from .errors import DslSyntaxError
from .lexer import Token, tokenize

_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, source: str):
        self._tokens = tokenize(source)
        self._pos = 0
        self._nesting = 0  # newline-transparent depth: ( [ and map {

    # token plumbing

    def _peek(self) -> Token:
        tok = self._tokens[self._pos]
        while tok.type == "newline" and self._nesting > 0:
            self._pos += 1
            tok = self._tokens[self._pos]
        return tok

    def _advance(self) -> Token:
        tok = self._peek()
        if tok.type != "eof":
            self._pos += 1
        return tok

    def _error(self, message, expected=""):
        tok = self._peek()
        return DslSyntaxError(message, tok.line, tok.col, expected)

    def _expect_op(self, op: str) -> Token:
        tok = self._peek()
        if tok.type != "op" or tok.value != op:
            raise self._error(f"expected {op!r}, found {self._describe(tok)}", op)
        return self._advance()

    def _expect_keyword(self, word: str) -> Token:
        tok = self._peek()
        if tok.type != "keyword" or tok.value != word:
            raise self._error(f"expected {word!r}, found {self._describe(tok)}",
                              word)
        return self._advance()

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.type == "eof":
            return "end of input"
        if tok.type == "newline":
            return "end of line"
        return repr(tok.value)

    def _at_op(self, *ops) -> bool:
        tok = self._peek()
        return tok.type == "op" and tok.value in ops

    def _at_keyword(self, *words) -> bool:
        tok = self._peek()
        return tok.type == "keyword" and tok.value in words

    def _skip_newlines(self):
        while self._tokens[self._pos].type == "newline":
            self._pos += 1

    def _end_statement(self):
        tok = self._tokens[self._pos]
        if tok.type == "newline":
            self._pos += 1
            return
        if tok.type == "eof":
            return
        if tok.type == "op" and tok.value == "}":
            return  # block close ends the last statement
        raise DslSyntaxError(
            f"expected end of line, found {self._describe(tok)}",
            tok.line, tok.col, "newline")

    # statements

    def parse_program(self) -> Program:
        body = []
        self._skip_newlines()
        while self._peek().type != "eof":
            body.append(self._statement())
            self._skip_newlines()
        return Program(body, line=1)

    def _statement(self):
        if self._at_keyword("if"):
            return self._if_statement()
        if self._at_keyword("while"):
            return self._while_statement()
        if self._at_keyword("for"):
            return self._for_statement()
        return self._simple_statement()

    def _simple_statement(self):
        start = self._peek()
        expr = self._expression()
        if self._at_op("="):
            self._advance()
            value = self._expression()
            stmt = self._make_assign(expr, value, start)
        else:
            stmt = ExprStmt(expr, line=start.line)
        self._end_statement()
        return stmt

    def _make_assign(self, target, value, start: Token):
        if isinstance(target, Name) and target.ident == "SIGNAL":
            # SIGNAL = e  ~>  STATE["__signal__"] = str(e)
            sugar = Index(Name("STATE", line=start.line),
                          Literal("__signal__", line=start.line),
                          line=start.line)
            call = Call(Name("str", line=start.line), [value], line=start.line)
            return Assign(sugar, call, line=start.line)
        if isinstance(target, (Name, Index)):
            return Assign(target, value, line=start.line)
        raise DslSyntaxError("cannot assign to this expression",
                             start.line, start.col)

    def _block(self) -> list:
        self._expect_op("{")
        body = []
        self._skip_newlines()
        while not self._at_op("}"):
            if self._peek().type == "eof":
                raise self._error("unterminated block", "}")
            body.append(self._statement())
            self._skip_newlines()
        self._expect_op("}")
        return body

    def _if_statement(self):
        tok = self._expect_keyword("if")
        branches = [(self._expression(), self._block())]
        orelse = None
        while True:
            save = self._pos
            self._skip_newlines()
            if self._at_keyword("elif"):
                self._advance()
                branches.append((self._expression(), self._block()))
                continue
            if self._at_keyword("else"):
                self._advance()
                orelse = self._block()
            else:
                self._pos = save
            break
        self._end_statement()
        return If(branches, orelse, line=tok.line)

    def _while_statement(self):
        tok = self._expect_keyword("while")
        cond = self._expression()
        body = self._block()
        self._end_statement()
        return While(cond, body, line=tok.line)

    def _for_statement(self):
        tok = self._expect_keyword("for")
        var = self._peek()
        if var.type != "ident":
            raise self._error("expected loop variable name", "identifier")
        self._advance()
        self._expect_keyword("in")
        iterable = self._expression()
        body = self._block()
        self._end_statement()
        return For(var.value, iterable, body, line=tok.line)

    # expressions

    def _expression(self):
        return self._or_expr()

    def _or_expr(self):
        left = self._and_expr()
        while self._at_keyword("or"):
            tok = self._advance()
            left = BinOp("or", left, self._and_expr(), line=tok.line)
        return left

    def _and_expr(self):
        left = self._not_expr()
        while self._at_keyword("and"):
            tok = self._advance()
            left = BinOp("and", left, self._not_expr(), line=tok.line)
        return left

    def _not_expr(self):
        if self._at_keyword("not"):
            tok = self._advance()
            return UnaryOp("not", self._not_expr(), line=tok.line)
        return self._comparison()

    def _comparison(self):
        left = self._additive()
        if self._at_op(*_CMP_OPS):
            tok = self._advance()
            return BinOp(tok.value, left, self._additive(), line=tok.line)
        return left

    def _additive(self):
        left = self._multiplicative()
        while self._at_op("+", "-"):
            tok = self._advance()
            left = BinOp(tok.value, left, self._multiplicative(), line=tok.line)
        return left

    def _multiplicative(self):
        left = self._unary()
        while self._at_op("*", "/", "%"):
            tok = self._advance()
            left = BinOp(tok.value, left, self._unary(), line=tok.line)
        return left

    def _unary(self):
        if self._at_op("-"):
            tok = self._advance()
            return UnaryOp("-", self._unary(), line=tok.line)
        return self._postfix()

    def _postfix(self):
        expr = self._atom()
        while True:
            if self._at_op("["):
                tok = self._advance()
                self._nesting += 1
                index = self._expression()
                self._nesting -= 1
                self._expect_op("]")
                expr = Index(expr, index, line=tok.line)
                continue
            if self._at_op("("):
                tok = self._advance()
                self._nesting += 1
                args = []
                if not self._at_op(")"):
                    args.append(self._expression())
                    while self._at_op(","):
                        self._advance()
                        args.append(self._expression())
                self._nesting -= 1
                self._expect_op(")")
                expr = Call(expr, args, line=tok.line)
                continue
            return expr

    def _atom(self):
        tok = self._peek()
        if tok.type == "number":
            self._advance()
            return Literal(tok.value, line=tok.line)
        if tok.type == "string":
            self._advance()
            return Literal(tok.value, line=tok.line)
        if tok.type == "keyword":
            if tok.value in ("true", "false"):
                self._advance()
                return Literal(tok.value == "true", line=tok.line)
            if tok.value == "null":
                self._advance()
                return Literal(None, line=tok.line)
            raise self._error(f"unexpected keyword {tok.value!r}", "expression")
        if tok.type == "ident":
            self._advance()
            return Name(tok.value, line=tok.line)
        if self._at_op("("):
            self._advance()
            self._nesting += 1
            expr = self._expression()
            self._nesting -= 1
            self._expect_op(")")
            return expr
        if self._at_op("["):
            self._advance()
            self._nesting += 1
            items = []
            if not self._at_op("]"):
                items.append(self._expression())
                while self._at_op(","):
                    self._advance()
                    items.append(self._expression())
            self._nesting -= 1
            self._expect_op("]")
            return ListLit(items, line=tok.line)
        if self._at_op("{"):
            self._advance()
            self._nesting += 1
            pairs = []
            if not self._at_op("}"):
                pairs.append(self._map_pair())
                while self._at_op(","):
                    self._advance()
                    pairs.append(self._map_pair())
            self._nesting -= 1
            self._expect_op("}")
            return MapLit(pairs, line=tok.line)
        raise self._error(f"unexpected {self._describe(tok)}", "expression")

    def _map_pair(self):
        key = self._peek()
        if key.type != "string":
            raise self._error("map keys must be string literals", "string")
        self._advance()
        self._expect_op(":")
        return (key.value, self._expression())


def parse(source: str) -> Program:
    """Parse source text; raises DslSyntaxError with 1-based line/col."""
    if not isinstance(source, str):
        raise TypeError("source must be text")
    return Parser(source).parse_program()

"""Recursive-descent parser for the expression grammar.

Precedence, tightest first: ^ (right-assoc), unary -, * /, + -.
Functions are called by name with a single parenthesized argument.
"""

from __future__ import annotations

import re
from typing import Sequence

from ..errors import ParseError
from .nodes import FUNCTION_NAMES, BinOp, Call, Expression, Neg, Node, Num, Var

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(source) - len(stripped))
        if match.lastgroup == "num":
            tokens.append(_Token("num", match.group("num"), match.start("num")))
        elif match.lastgroup == "name":
            tokens.append(_Token("name", match.group("name"), match.start("name")))
        else:
            tokens.append(_Token("op", match.group("op"), match.start("op")))
        pos = match.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.variables = tuple(variables)
        self.tokens = _tokenize(source)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_op(self, op: str) -> None:
        tok = self.current
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected '{op}'", tok.pos)
        self.advance()

    def parse(self) -> Node:
        node = self.sum()
        tok = self.current
        if tok.kind != "end":
            raise ParseError(f"unexpected token {tok.text!r}", tok.pos)
        return node

    def sum(self) -> Node:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.current
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if self.current.kind == "op" and self.current.text == "(":
                if tok.text not in FUNCTION_NAMES:
                    raise ParseError(f"unknown function '{tok.text}'", tok.pos)
                self.advance()
                arg = self.sum()
                self.expect_op(")")
                return Call(tok.text, arg)
            if tok.text not in self.variables:
                raise ParseError(f"undeclared identifier '{tok.text}'", tok.pos)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.sum()
            self.expect_op(")")
            return node
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ParseError(f"unexpected {what}", tok.pos)


def parse(source: str, variables: Sequence[str]) -> Expression:
    """Parse source text over the given ordered variable names.

    Raises ParseError with the 0-based offset of the offending token for
    malformed input or undeclared identifiers.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    names = list(variables)
    if len(set(names)) != len(names):
        raise ValueError("variable names must be distinct")
    for name in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise ValueError(f"invalid variable name {name!r}")
    return Expression(_Parser(source, names).parse(), tuple(names))

"""Recursive-descent parser for scalar expressions.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := ("-")? power
    power  := atom ("^" factor)?
    atom   := number | name | name "(" expr ")" | "(" expr ")"
"""
from __future__ import annotations

import re

from ..errors import ExprSyntaxError, UnknownIdentifier
from .ast import CONSTANTS, FUNCTIONS, BinOp, Call, Const, Neg, Node, Pow, Var

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def tokenize(src: str) -> list:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, names):
        self.src = src
        self.names = set(names)
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, message, tok=None):
        tok = tok or self.tok
        raise ExprSyntaxError(message, tok[2], self.src)

    def accept(self, text):
        if self.tok[0] == "op" and self.tok[1] == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok[1] or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")

    def parse(self) -> Node:
        node = self.expr()
        if self.tok[0] != "end":
            self.fail(f"unexpected {self.tok[1]!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.accept("-"):
            return Neg(self.power())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.factor())
        return base

    def atom(self) -> Node:
        kind, text, pos = self.tok
        if kind == "number":
            self.i += 1
            return Const(float(text))
        if kind == "name":
            self.i += 1
            if self.tok[0] == "op" and self.tok[1] == "(":
                if text not in FUNCTIONS:
                    raise UnknownIdentifier(text, pos, self.src)
                self.i += 1
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in self.names:
                return Var(text)
            if text in CONSTANTS:
                return Const(CONSTANTS[text])
            if text in FUNCTIONS:
                self.fail(f"function {text!r} needs an argument in parentheses")
            raise UnknownIdentifier(text, pos, self.src)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {text!r}")


def parse_node(src: str, names) -> Node:
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0, src or "")
    return _Parser(src, names).parse()

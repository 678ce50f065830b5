"""Lowering of expression trees to a flat instruction tape.

A tape is a topologically ordered list of instructions ``(op, a, b, c)``:
``a``/``b`` are operand slots (or the variable index for ``VAR``) and ``c``
carries a constant value or exponent.  Several outputs may share one tape;
structurally equal subtrees are emitted once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .ast import BinOp, Call, Const, Neg, Node, Pow, Var, free_vars, to_str

CONST, VAR, ADD, SUB, MUL, DIV, NEG, POWI, POWR = range(9)
UNARY = {
    "sin": 9, "cos": 10, "tan": 11, "atan": 12, "tanh": 13, "sinh": 14,
    "cosh": 15, "exp": 16, "log": 17, "sqrt": 18, "abs": 19,
}
OPNAMES = {v: k for k, v in UNARY.items()}
OPNAMES.update({CONST: "const", VAR: "var", ADD: "+", SUB: "-", MUL: "*", DIV: "/",
                NEG: "neg", POWI: "powi", POWR: "powr"})

POLE_TOL = 1e-15
MAX_INT_EXPONENT = 2**31 - 1


@dataclass(frozen=True)
class Tape:
    op: np.ndarray  # int32[L]
    a: np.ndarray  # int32[L]
    b: np.ndarray  # int32[L]
    c: np.ndarray  # float64[L]
    outputs: np.ndarray  # int32[O]
    nvars: int
    sources: tuple  # printed subexpression per slot, for error reports

    def __len__(self):
        return len(self.op)

    def describe(self, slot: int) -> str:
        return self.sources[slot]


def fold(node: Node) -> float:
    """Numerically evaluate a variable-free subtree."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Neg):
        return -fold(node.arg)
    if isinstance(node, BinOp):
        x, y = fold(node.left), fold(node.right)
        if node.op == "+":
            return x + y
        if node.op == "-":
            return x - y
        if node.op == "*":
            return x * y
        if y == 0.0:
            raise DomainError("division by zero", to_str(node))
        return x / y
    if isinstance(node, Pow):
        x, y = fold(node.base), fold(node.exponent)
        if y != int(y) and x < 0:
            raise DomainError("negative base with non-integer exponent", to_str(node))
        if x == 0 and y < 0:
            raise DomainError("zero raised to a negative power", to_str(node))
        return math.pow(x, y)
    if isinstance(node, Call):
        x = fold(node.arg)
        if node.fn == "log" and x <= 0 or node.fn == "sqrt" and x < 0:
            raise DomainError(f"{node.fn} of non-positive argument", to_str(node))
        if node.fn == "tan" and abs(math.cos(x)) < POLE_TOL:
            raise DomainError("tan at a pole", to_str(node))
        fn = abs if node.fn == "abs" else getattr(math, node.fn)
        try:
            return float(fn(x))
        except OverflowError:
            raise DomainError("overflow", to_str(node)) from None
    raise DomainError("unbound variable in constant subexpression", to_str(node))


class _Builder:
    def __init__(self, names):
        self.index = {name: i for i, name in enumerate(names)}
        self.rows = []
        self.sources = []
        self.memo = {}

    def emit(self, key, op, a=0, b=0, c=0.0, source=""):
        slot = self.memo.get(key)
        if slot is None:
            slot = len(self.rows)
            self.rows.append((op, a, b, c))
            self.sources.append(source)
            self.memo[key] = slot
        return slot

    def lower(self, node: Node) -> int:
        slot = self.memo.get(node)
        if slot is not None:
            return slot
        if isinstance(node, Var):
            return self.emit(node, VAR, a=self.index[node.name], source=node.name)
        if not free_vars(node):
            value = fold(node)
            return self.emit(("const", value, math.copysign(1.0, value)), CONST, c=value,
                             source=to_str(node))
        src = to_str(node)
        if isinstance(node, Neg):
            return self.emit(node, NEG, self.lower(node.arg), source=src)
        if isinstance(node, BinOp):
            op = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}[node.op]
            return self.emit(node, op, self.lower(node.left), self.lower(node.right), source=src)
        if isinstance(node, Call):
            return self.emit(node, UNARY[node.fn], self.lower(node.arg), source=src)
        # Pow
        if free_vars(node.exponent):
            rewritten = Call("exp", BinOp("*", node.exponent, Call("log", node.base)))
            slot = self.lower(rewritten)
            self.memo[node] = slot
            return slot
        k = fold(node.exponent)
        base = self.lower(node.base)
        if k == int(k) and abs(k) <= MAX_INT_EXPONENT:
            return self.emit(node, POWI, base, c=float(int(k)), source=src)
        return self.emit(node, POWR, base, c=k, source=src)


def compile_tape(nodes, names) -> Tape:
    builder = _Builder(names)
    outputs = [builder.lower(node) for node in nodes]
    rows = builder.rows
    return Tape(
        op=np.array([r[0] for r in rows], dtype=np.int32),
        a=np.array([r[1] for r in rows], dtype=np.int32),
        b=np.array([r[2] for r in rows], dtype=np.int32),
        c=np.array([r[3] for r in rows], dtype=np.float64),
        outputs=np.array(outputs, dtype=np.int32),
        nvars=len(names),
        sources=tuple(builder.sources),
    )

"""Expression tree nodes and the canonical printer.

Nodes are frozen dataclasses, so structurally equal subtrees compare and hash
equal; the tape compiler relies on that for common-subexpression sharing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

FUNCTIONS = (
    "sin", "cos", "tan", "atan", "tanh", "sinh", "cosh", "exp", "log", "sqrt", "abs",
)
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Pow, Call]


def free_vars(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, (Neg, Call)):
        return free_vars(node.arg)
    if isinstance(node, BinOp):
        return free_vars(node.left) | free_vars(node.right)
    return free_vars(node.base) | free_vars(node.exponent)


def substitute(node: Node, mapping: dict) -> Node:
    """Replace every ``Var`` whose name is in ``mapping`` by the mapped node."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, mapping))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))
    return Pow(substitute(node.base, mapping), substitute(node.exponent, mapping))


# printing precedence: sum 1, product 2, unary minus 3, power 4, atom 5
def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return 1 if node.op in "+-" else 2
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Const) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def _number(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot print non-finite constant {value!r}")
    if value == math.pi:
        return "pi"
    if value == int(value) and abs(value) < 1e16:
        return str(int(value)) if value != 0 or math.copysign(1.0, value) > 0 else "-0"
    return repr(value)


def _wrap(node: Node, min_prec: int) -> str:
    text = to_str(node)
    return f"({text})" if _prec(node) < min_prec else text


def to_str(node: Node) -> str:
    """Print ``node`` so that parsing the text rebuilds the same evaluation order."""
    if isinstance(node, Const):
        return _number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({to_str(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, 4)
    if isinstance(node, Pow):
        return _wrap(node.base, 5) + "^" + _wrap(node.exponent, 3)
    p = _prec(node)
    return f"{_wrap(node.left, p)} {node.op} {_wrap(node.right, p + 1)}"

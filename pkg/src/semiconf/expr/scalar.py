from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import DimensionMismatch, DomainError
from . import backend
from .ast import BinOp, Call, Const, Neg, Node, Pow, Var, free_vars, substitute, to_str
from .parser import parse_node
from .tape import Tape, compile_tape


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar function at one point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray


def _lift(other, vars_):
    if isinstance(other, ScalarExpr):
        if other.vars != vars_:
            raise DimensionMismatch(f"variable lists differ: {other.vars} vs {vars_}")
        return other.node
    if isinstance(other, (int, float, np.floating, np.integer)):
        return Const(float(other))
    return NotImplemented


@dataclass(frozen=True, eq=False)
class ScalarExpr:
    """A parsed smooth real function of the named coordinates ``vars``."""

    node: Node
    vars: tuple

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variable names in {self.vars}")
        extra = free_vars(self.node) - set(self.vars)
        if extra:
            raise ValueError(f"variables {sorted(extra)} not in {self.vars}")

    @classmethod
    def parse(cls, src: str, vars) -> "ScalarExpr":
        vars = tuple(vars)
        if len(set(vars)) != len(vars):
            raise ValueError(f"duplicate variable names in {vars}")
        return cls(parse_node(src, vars), vars)

    @classmethod
    def constant(cls, value: float, vars) -> "ScalarExpr":
        return cls(Const(float(value)), vars)

    @classmethod
    def variable(cls, name: str, vars) -> "ScalarExpr":
        return cls(Var(name), vars)

    def __str__(self):
        return to_str(self.node)

    def __repr__(self):
        return f"ScalarExpr({str(self)!r}, vars={self.vars})"

    @cached_property
    def tape(self) -> Tape:
        return compile_tape([self.node], self.vars)

    # evaluation

    def jets(self, points, backend_name=None):
        """Batch evaluation: ``(value[P], grad[P, m], hess[P, m, m], fail[P])``."""
        pts = _points(points, len(self.vars))
        v, g, h, fail = backend.eval_tape(self.tape, pts, backend_name)
        return v[:, 0], g[:, 0], h[:, 0], fail

    def jet(self, point) -> Jet2:
        pts = _points([point], len(self.vars))
        v, g, h, fail = self.jets(pts)
        if fail[0] >= 0:
            raise DomainError("evaluation outside the domain", self.tape.describe(fail[0]), pts[0])
        return Jet2(float(v[0]), g[0], h[0])

    def __call__(self, *coords) -> float:
        return self.jet(coords).value

    def values(self, points) -> np.ndarray:
        """Values at many points; NaN where evaluation left the domain."""
        return self.jets(points)[0]

    # construction

    def substitute(self, mapping: dict, vars=None) -> "ScalarExpr":
        """Replace variables by expressions (or numbers); ``vars`` is the new variable list."""
        new_vars = tuple(vars) if vars is not None else self.vars
        nodes = {}
        for name, repl in mapping.items():
            if isinstance(repl, ScalarExpr):
                nodes[name] = repl.node
            elif isinstance(repl, (Const, Var, Neg, BinOp, Pow, Call)):
                nodes[name] = repl
            else:
                nodes[name] = Const(float(repl))
        return ScalarExpr(substitute(self.node, nodes), new_vars)

    def with_vars(self, vars) -> "ScalarExpr":
        return ScalarExpr(self.node, vars)

    def _binary(self, op, other, reflected=False):
        node = _lift(other, self.vars)
        if node is NotImplemented:
            return NotImplemented
        left, right = (node, self.node) if reflected else (self.node, node)
        if op == "^":
            return ScalarExpr(Pow(left, right), self.vars)
        return ScalarExpr(BinOp(op, left, right), self.vars)

    def __add__(self, other):
        return self._binary("+", other)

    def __radd__(self, other):
        return self._binary("+", other, True)

    def __sub__(self, other):
        return self._binary("-", other)

    def __rsub__(self, other):
        return self._binary("-", other, True)

    def __mul__(self, other):
        return self._binary("*", other)

    def __rmul__(self, other):
        return self._binary("*", other, True)

    def __truediv__(self, other):
        return self._binary("/", other)

    def __rtruediv__(self, other):
        return self._binary("/", other, True)

    def __pow__(self, other):
        return self._binary("^", other)

    def __neg__(self):
        return ScalarExpr(Neg(self.node), self.vars)

    def apply(self, fn: str) -> "ScalarExpr":
        return ScalarExpr(Call(fn, self.node), self.vars)


def _points(points, m) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1) if m else pts.reshape(-1, 0)
    if pts.ndim != 2 or pts.shape[1] != m:
        raise DimensionMismatch(f"expected points with {m} coordinates, got shape {pts.shape}")
    return np.ascontiguousarray(pts)


def parse(src: str, vars) -> ScalarExpr:
    return ScalarExpr.parse(src, vars)


def eval_jet(e: ScalarExpr, point) -> Jet2:
    return e.jet(point)


class ExprBundle:
    """Several expressions over the same variables, compiled into one shared tape."""

    def __init__(self, exprs, vars):
        self.vars = tuple(vars)
        self.exprs = tuple(exprs)
        for e in self.exprs:
            if e.vars != self.vars:
                raise DimensionMismatch(f"expression over {e.vars}, expected {self.vars}")
        self.tape = compile_tape([e.node for e in self.exprs], self.vars)

    def jets(self, points, backend_name=None):
        """``(value[P, O], grad[P, O, m], hess[P, O, m, m], fail[P])``."""
        return backend.eval_tape(self.tape, _points(points, len(self.vars)), backend_name)

    def raise_failure(self, points, fail):
        bad = np.flatnonzero(fail >= 0)
        if len(bad):
            p = bad[0]
            raise DomainError("evaluation outside the domain",
                              self.tape.describe(fail[p]), np.asarray(points)[p])

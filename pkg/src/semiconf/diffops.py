"""Maps given by expression tuples and the flat differential operators on them.

Points passed to any function here are expressed in the map's own source
frame.  For a map in the null frame, metric quantities (pullback, gradients
with eta signs) are computed on its Cartesian conjugate
``from_null . F . to_null``, where the metric is diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core import Signature
from .errors import DimensionMismatch
from .expr import ExprBundle, ScalarExpr
from .expr.scalar import _points

CARTESIAN = "cartesian"
NULL = "null"


def default_vars(sig: Signature, frame: str = CARTESIAN) -> tuple:
    if frame == NULL:
        return ("u", "v")
    if sig.n == 2:
        return ("x", "t") if sig.nu == 1 else ("x", "y")
    return tuple(f"x{i}" for i in range(1, sig.n + 1))


def target_vars(sig: Signature, frame: str = CARTESIAN) -> tuple:
    if frame == NULL:
        return ("U", "V")
    if sig.n == 2:
        return ("X", "T") if sig.nu == 1 else ("u", "v")
    return tuple(f"y{i}" for i in range(1, sig.n + 1))


def null_to_cartesian_exprs(vars=("x", "t")):
    """``u = x + t`` and ``v = x - t`` as expressions in Cartesian coordinates."""
    x = ScalarExpr.variable(vars[0], vars)
    t = ScalarExpr.variable(vars[1], vars)
    return x + t, x - t


@dataclass(frozen=True, eq=False)
class SmoothMap:
    """A map R^n_nu -> R^n_nu given componentwise by expressions."""

    sig_in: Signature
    sig_out: Signature
    comps: tuple
    frame: str = CARTESIAN
    vars: tuple = field(default=None)

    def __post_init__(self):
        comps = tuple(self.comps)
        object.__setattr__(self, "comps", comps)
        if self.sig_in != self.sig_out:
            raise DimensionMismatch(
                f"source and target signatures must agree, got {self.sig_in} and {self.sig_out}"
            )
        if len(comps) != self.sig_out.n:
            raise DimensionMismatch(f"{len(comps)} components for dimension {self.sig_out.n}")
        if self.frame not in (CARTESIAN, NULL):
            raise ValueError(f"unknown frame {self.frame!r}")
        if self.frame == NULL and (self.sig_in.n, self.sig_in.nu) != (2, 1):
            raise ValueError("the null frame exists only for signature (2, 1)")
        vars_ = tuple(self.vars) if self.vars is not None else comps[0].vars
        object.__setattr__(self, "vars", vars_)
        if len(vars_) != self.sig_in.n:
            raise DimensionMismatch(f"{len(vars_)} source coordinates for dimension {self.sig_in.n}")
        for c in comps:
            if c.vars != vars_:
                raise DimensionMismatch(f"component over {c.vars}, expected {vars_}")

    @classmethod
    def from_strings(cls, sig: Signature, comps, frame: str = CARTESIAN, vars=None) -> "SmoothMap":
        vars = tuple(vars) if vars is not None else default_vars(sig, frame)
        exprs = [ScalarExpr.parse(src, vars) for src in comps]
        return cls(sig, sig, exprs, frame, vars)

    @classmethod
    def identity(cls, sig: Signature, frame: str = CARTESIAN, vars=None) -> "SmoothMap":
        vars = tuple(vars) if vars is not None else default_vars(sig, frame)
        return cls(sig, sig, [ScalarExpr.variable(v, vars) for v in vars], frame, vars)

    @property
    def sig(self) -> Signature:
        return self.sig_out

    @property
    def n(self) -> int:
        return self.sig_out.n

    def __str__(self):
        return f"({', '.join(str(c) for c in self.comps)})"

    @cached_property
    def bundle(self) -> ExprBundle:
        return ExprBundle(self.comps, self.vars)

    def jets(self, points):
        """``(value[P, n], jac[P, n, n], hess[P, n, n, n], fail[P])`` in the map's own frame."""
        return self.bundle.jets(points)

    def __call__(self, *coords) -> np.ndarray:
        pts = _points([coords], self.n)
        value, _, _, fail = self.jets(pts)
        self.bundle.raise_failure(pts, fail)
        return value[0]

    def image(self, points) -> np.ndarray:
        """Images of many points; rows of NaN where evaluation failed."""
        return self.jets(points)[0]

    def compose(self, phi: ScalarExpr) -> ScalarExpr:
        """``phi . F`` by substituting the components for phi's variables, in order."""
        if len(phi.vars) != self.n:
            raise DimensionMismatch(f"phi has {len(phi.vars)} variables, map has {self.n} components")
        return phi.substitute(dict(zip(phi.vars, self.comps)), vars=self.vars)

    def scaled(self, factor: float) -> "SmoothMap":
        return SmoothMap(self.sig_in, self.sig_out, [c * factor for c in self.comps],
                         self.frame, self.vars)

    def to_cartesian(self) -> "SmoothMap":
        """Cartesian conjugate in coordinates (x, t); a Cartesian map is returned unchanged."""
        if self.frame == CARTESIAN:
            return self
        return self._cartesian

    @cached_property
    def _cartesian(self) -> "SmoothMap":
        vars = ("x", "t")
        u, v = null_to_cartesian_exprs(vars)
        big_u, big_v = (c.substitute({self.vars[0]: u, self.vars[1]: v}, vars=vars)
                        for c in self.comps)
        return SmoothMap(self.sig_in, self.sig_out,
                         [(big_u + big_v) * 0.5, (big_u - big_v) * 0.5], CARTESIAN, vars)

    def source_to_cartesian(self, points) -> np.ndarray:
        pts = _points(points, self.n)
        if self.frame == NULL:
            return np.column_stack([(pts[:, 0] + pts[:, 1]) / 2, (pts[:, 0] - pts[:, 1]) / 2])
        return pts


@dataclass(frozen=True)
class PointJet:
    point: np.ndarray
    jac: np.ndarray
    laps: np.ndarray
    hessians: np.ndarray


def point_jet(F: SmoothMap, p) -> PointJet:
    """Jacobian, component Laplacians and Hessians at ``p`` (Cartesian data)."""
    G = F.to_cartesian()
    pts = F.source_to_cartesian([p])
    _, jac, hess, fail = G.jets(pts)
    G.bundle.raise_failure(pts, fail)
    signs = G.sig_in.signs
    laps = np.einsum("i,jii->j", signs, hess[0])
    return PointJet(pts[0], jac[0], laps, hess[0])


def jacobian(F: SmoothMap, p) -> np.ndarray:
    """Entry (j, i) is d y_j / d x_i at ``p``, in the map's own frame."""
    pts = _points([p], F.n)
    _, jac, _, fail = F.jets(pts)
    F.bundle.raise_failure(pts, fail)
    return jac[0]


def laplacian(sig: Signature, phi: ScalarExpr, p) -> float:
    """Sum of eps_i * d^2 phi / dx_i^2 at ``p``."""
    if len(phi.vars) != sig.n:
        raise DimensionMismatch(f"phi has {len(phi.vars)} variables, signature has n={sig.n}")
    return float(np.sum(sig.signs * np.diag(phi.jet(p).hess)))


def laplacians(sig: Signature, phi: ScalarExpr, points):
    """Batch form: ``(values[P], fail[P])``; NaN where evaluation failed."""
    _, _, hess, fail = phi.jets(points)
    return np.einsum("i,pii->p", sig.signs, hess), fail


def eta_gradient(sig: Signature, phi: ScalarExpr, p) -> np.ndarray:
    """Gradient with the index raised by eta: components eps_i * d phi / dx_i."""
    if len(phi.vars) != sig.n:
        raise DimensionMismatch(f"phi has {len(phi.vars)} variables, signature has n={sig.n}")
    return sig.signs * phi.jet(p).grad


def pullback_metric(F: SmoothMap, p) -> np.ndarray:
    """J^T eta J for the Cartesian Jacobian J at ``p``."""
    J = point_jet(F, p).jac
    return J.T @ F.sig_out.eta @ J

"""Conformal maps of 2D Minkowski space in null coordinates.

With ``u = x + t`` and ``v = x - t`` every conformal map has the form
``(psi(u), chi(v))`` or ``(psi(v), chi(u))`` with psi and chi both
increasing or both decreasing.  This module builds such maps from a pair,
recovers the pair from a map, splits wave solutions into left- and
right-moving parts, and handles null rectangles and the diamond
``|x| + |t| < 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .conformal import DEFAULT_TOL, jacobian_sweep
from .core import CausalCharacter, Signature, causal_character
from .diffops import NULL, SmoothMap
from .errors import (DegenerateRectangle, DomainError, MixedMonotonicity, NotConformal,
                     NotSeparable, NotWaveSolution, ZeroDerivative)
from .expr import ScalarExpr
from .expr.ast import BinOp, Const, Var

MINKOWSKI = Signature(2, 1)
NULL_VARS = ("u", "v")
ARG = ("s",)
MONOTONE_SAMPLES = 256
ZERO_DERIVATIVE = 1e-12


class Pattern(enum.Enum):
    BOTH_INCREASING = "both-increasing"
    BOTH_DECREASING = "both-decreasing"


class Branch(enum.Enum):
    DIRECT = "direct"  # (psi(u), chi(v))
    SWAPPED = "swapped"  # (psi(v), chi(u))


def to_null(p):
    x, t = p
    return (x + t, x - t)


def from_null(q):
    u, v = q
    return ((u + v) / 2, (u - v) / 2)


def _one_var(f) -> ScalarExpr:
    if isinstance(f, ScalarExpr):
        if len(f.vars) != 1:
            raise ValueError(f"expected a function of one variable, got {f.vars}")
        return f.with_vars(ARG) if f.vars == ARG else f.substitute({f.vars[0]: Var("s")}, ARG)
    return ScalarExpr.parse(str(f), ARG)


@dataclass(frozen=True)
class MonotonePair:
    """The classifying datum of a 2D Minkowski conformal map.

    ``psi`` and ``chi`` are expressions in the single variable ``s``;
    ``psi_domain``/``chi_domain`` are the open intervals on which they are
    declared (infinite bounds allowed).
    """

    psi: ScalarExpr
    chi: ScalarExpr
    pattern: Pattern
    branch: Branch = Branch.DIRECT
    psi_domain: tuple = (-1.0, 1.0)
    chi_domain: tuple = (-1.0, 1.0)

    def to_dict(self) -> dict:
        return {"psi": str(self.psi), "chi": str(self.chi), "pattern": self.pattern.value,
                "branch": self.branch.value,
                "psi_domain": [float(c) for c in self.psi_domain],
                "chi_domain": [float(c) for c in self.chi_domain]}


def domain_samples(domain, count: int = MONOTONE_SAMPLES) -> np.ndarray:
    """``count`` interior points plus one point just inside each end.

    Infinite ends are handled by sampling a compactified parameter.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi:
        raise ValueError(f"empty domain {domain}")
    w = np.concatenate([[0.0], (np.arange(count) + 0.5) / count, [1.0]])
    if math.isfinite(lo) and math.isfinite(hi):
        eps = 1e-6
        return lo + (hi - lo) * (eps + (1 - 2 * eps) * w)
    eps = 0.5 / (count + 2)
    w = eps + (1 - 2 * eps) * w
    if math.isfinite(lo):
        return lo + w / (1 - w)
    if math.isfinite(hi):
        return hi - (1 - w) / w
    return np.tan(np.pi * (w - 0.5))


def _derivative_sign(f: ScalarExpr, domain, name: str) -> int:
    pts = domain_samples(domain)[:, None]
    _, grad, _, fail = f.jets(pts)
    bad = np.flatnonzero(fail >= 0)
    if len(bad):
        raise DomainError("evaluation outside the domain", f.tape.describe(fail[bad[0]]),
                          pts[bad[0]])
    d = grad[:, 0]
    small = np.flatnonzero(np.abs(d) <= ZERO_DERIVATIVE)
    if len(small):
        raise ZeroDerivative(f"{name}' = {d[small[0]]:.3e} at s = {pts[small[0], 0]:.6g}")
    if (d > 0).all():
        return 1
    if (d < 0).all():
        return -1
    raise MixedMonotonicity(f"{name}' changes sign on {tuple(domain)}")


def validate_pattern(psi: ScalarExpr, chi: ScalarExpr, psi_domain, chi_domain) -> Pattern:
    sp = _derivative_sign(psi, psi_domain, "psi")
    sc = _derivative_sign(chi, chi_domain, "chi")
    if sp != sc:
        raise MixedMonotonicity(
            f"psi is {'in' if sp > 0 else 'de'}creasing but chi is "
            f"{'in' if sc > 0 else 'de'}creasing"
        )
    return Pattern.BOTH_INCREASING if sp > 0 else Pattern.BOTH_DECREASING


def make_pair(psi, chi, branch=Branch.DIRECT, psi_domain=(-1.0, 1.0),
              chi_domain=(-1.0, 1.0)) -> MonotonePair:
    """Validate ``psi``, ``chi`` (text or one-variable expressions) and infer the pattern."""
    psi, chi = _one_var(psi), _one_var(chi)
    branch = Branch(branch)
    pattern = validate_pattern(psi, chi, psi_domain, chi_domain)
    return MonotonePair(psi, chi, pattern, branch, tuple(psi_domain), tuple(chi_domain))


def build_map_from_pair(pair: MonotonePair) -> SmoothMap:
    """The null-frame map ``(psi(u), chi(v))`` (direct) or ``(psi(v), chi(u))`` (swapped)."""
    pattern = validate_pattern(pair.psi, pair.chi, pair.psi_domain, pair.chi_domain)
    if pattern != pair.pattern:
        raise MixedMonotonicity(f"declared {pair.pattern.value}, found {pattern.value}")
    psi_arg, chi_arg = ("u", "v") if pair.branch == Branch.DIRECT else ("v", "u")
    comps = [pair.psi.substitute({"s": Var(psi_arg)}, NULL_VARS),
             pair.chi.substitute({"s": Var(chi_arg)}, NULL_VARS)]
    return SmoothMap(MINKOWSKI, MINKOWSKI, comps, NULL, NULL_VARS)


def cartesian_form(pair: MonotonePair) -> SmoothMap:
    """The same map written in (x, t) on both sides."""
    return build_map_from_pair(pair).to_cartesian()


def conformal_factor(pair: MonotonePair, u, v) -> np.ndarray:
    """``psi' chi'`` at the arguments each function sees on its branch."""
    u, v = np.atleast_1d(np.asarray(u, float)), np.atleast_1d(np.asarray(v, float))
    a, b = (u, v) if pair.branch == Branch.DIRECT else (v, u)
    dpsi = pair.psi.jets(a[:, None])[1][:, 0]
    dchi = pair.chi.jets(b[:, None])[1][:, 0]
    return dpsi * dchi


def compactification() -> MonotonePair:
    """``psi = chi = (2/pi) atan``: all of R^2_1 onto the diamond |x| + |t| < 1."""
    f = ScalarExpr.parse("2/pi*atan(s)", ARG)
    inf = float("inf")
    return MonotonePair(f, f, Pattern.BOTH_INCREASING, Branch.DIRECT, (-inf, inf), (-inf, inf))


def inverse_compactification() -> MonotonePair:
    f = ScalarExpr.parse("tan(pi*s/2)", ARG)
    return MonotonePair(f, f, Pattern.BOTH_INCREASING, Branch.DIRECT, (-1.0, 1.0), (-1.0, 1.0))


# null rectangles


@dataclass(frozen=True)
class NullRectangle:
    """Open rectangle ``(a1, a2) x (b1, b2)`` in null coordinates."""

    a1: float
    a2: float
    b1: float
    b2: float

    def __post_init__(self):
        if not (self.a1 < self.a2 and self.b1 < self.b2):
            raise DegenerateRectangle(f"empty null rectangle {self.to_dict()}")

    @classmethod
    def diamond(cls) -> "NullRectangle":
        return cls(-1.0, 1.0, -1.0, 1.0)

    @classmethod
    def from_dict(cls, d) -> "NullRectangle":
        return cls(float(d["u"][0]), float(d["u"][1]), float(d["v"][0]), float(d["v"][1]))

    def to_dict(self) -> dict:
        return {"u": [self.a1, self.a2], "v": [self.b1, self.b2]}

    @property
    def center(self) -> tuple:
        return ((self.a1 + self.a2) / 2, (self.b1 + self.b2) / 2)

    def contains(self, u, v) -> np.ndarray:
        u, v = np.asarray(u), np.asarray(v)
        return (self.a1 < u) & (u < self.a2) & (self.b1 < v) & (v < self.b2)

    def axes(self, k: int) -> tuple:
        """``k`` interior abscissae per side, cell-centred so odd ``k`` hits the midlines."""
        w = (np.arange(k) + 1) / (k + 1)
        return self.a1 + (self.a2 - self.a1) * w, self.b1 + (self.b2 - self.b1) * w

    def grid(self, k: int) -> np.ndarray:
        us, vs = self.axes(k)
        U, V = np.meshgrid(us, vs, indexing="ij")
        return np.column_stack([U.ravel(), V.ravel()])


def bounding_null_rectangle(points) -> NullRectangle:
    """Smallest null rectangle whose closure holds every ``(x, t)`` in ``points``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    u = pts[:, 0] + pts[:, 1]
    v = pts[:, 0] - pts[:, 1]
    a1, a2, b1, b2 = u.min(), u.max(), v.min(), v.max()
    if not (a1 < a2 and b1 < b2):
        raise DegenerateRectangle("points span zero width in u or v")
    return NullRectangle(float(a1), float(a2), float(b1), float(b2))


def _affine_interp(lo, hi, dst_lo, dst_hi) -> ScalarExpr:
    # dst_lo * (1 - w) + dst_hi * w with w = (s - lo) / (hi - lo): hits both ends exactly
    w = BinOp("/", BinOp("-", Var("s"), Const(lo)), Const(hi - lo))
    node = BinOp("+", BinOp("*", Const(dst_lo), BinOp("-", Const(1.0), w)),
                 BinOp("*", Const(dst_hi), w))
    return ScalarExpr(node, ARG)


def rectangle_equivalence(src: NullRectangle, dst: NullRectangle) -> MonotonePair:
    """Increasing affine pair mapping ``src`` onto ``dst`` side by side."""
    psi = _affine_interp(src.a1, src.a2, dst.a1, dst.a2)
    chi = _affine_interp(src.b1, src.b2, dst.b1, dst.b2)
    return MonotonePair(psi, chi, Pattern.BOTH_INCREASING, Branch.DIRECT,
                        (src.a1, src.a2), (src.b1, src.b2))


# factorization


def _check_null_map(F: SmoothMap):
    if F.frame != NULL:
        raise ValueError("expected a map written in null coordinates")


def factor_map(F: SmoothMap, rect: NullRectangle, tol: float = DEFAULT_TOL,
               grid: int = 17) -> MonotonePair:
    """Recover ``(psi, chi)`` and the branch from a null-frame conformal map.

    Separability is tested first (``dU/dv`` or ``dU/du`` vanishing on the
    grid, relative to the other partial), then conformality; psi and chi are
    read off the rectangle's midlines and the rebuilt map must match ``F`` on
    the grid.
    """
    _check_null_map(F)
    pts = rect.grid(grid)
    value, jac, _, fail = F.jets(pts)
    F.bundle.raise_failure(pts, fail)
    du, dv = np.abs(jac[:, 0, 0]).max(), np.abs(jac[:, 0, 1]).max()
    if dv <= tol * max(1.0, du):
        branch = Branch.DIRECT
    elif du <= tol * max(1.0, dv):
        branch = Branch.SWAPPED
    else:
        raise NotSeparable(f"neither partial of U vanishes: max|dU/du| = {du:.3e}, "
                           f"max|dU/dv| = {dv:.3e}")

    sweep = jacobian_sweep(F, pts, tol)
    if not sweep.conformal.all():
        k = int(np.flatnonzero(~sweep.conformal)[0])
        raise NotConformal("map is not conformal on the rectangle", sweep.verdict(k))

    u_mid, v_mid = rect.center
    U, V = F.comps
    s = Var("s")
    if branch == Branch.DIRECT:
        psi = U.substitute({F.vars[0]: s, F.vars[1]: v_mid}, ARG)
        chi = V.substitute({F.vars[0]: u_mid, F.vars[1]: s}, ARG)
        psi_dom, chi_dom = (rect.a1, rect.a2), (rect.b1, rect.b2)
    else:
        psi = U.substitute({F.vars[0]: u_mid, F.vars[1]: s}, ARG)
        chi = V.substitute({F.vars[0]: s, F.vars[1]: v_mid}, ARG)
        psi_dom, chi_dom = (rect.b1, rect.b2), (rect.a1, rect.a2)
    pair = make_pair(psi, chi, branch, psi_dom, chi_dom)

    rebuilt = build_map_from_pair(pair).image(pts)
    err = np.abs(rebuilt - value).max()
    if not err <= tol * max(1.0, np.abs(value).max()):
        raise NotSeparable(f"reconstruction from midlines misses F by {err:.3e}")
    return pair


# d'Alembert split of wave solutions


@dataclass
class DalembertSplit:
    """``X(x, t) = f(x + t) + g(x - t)`` with f, g expressions in ``s``."""

    f: ScalarExpr
    g: ScalarExpr
    base: tuple
    reconstruction_error: float
    wave_residual: float

    def tables(self, rect: NullRectangle, k: int) -> dict:
        us, vs = rect.axes(k)
        return {"f": [[float(a), float(b)] for a, b in zip(us, self.f.values(us[:, None]))],
                "g": [[float(a), float(b)] for a, b in zip(vs, self.g.values(vs[:, None]))]}

    def to_dict(self) -> dict:
        return {"f": str(self.f), "g": str(self.g), "base": list(self.base),
                "reconstruction_error": self.reconstruction_error,
                "wave_residual": self.wave_residual}


def dalembert_decompose(X: ScalarExpr, rect: NullRectangle, tol: float = DEFAULT_TOL,
                        grid: int = 65) -> DalembertSplit:
    """Split a solution of ``X_xx - X_tt = 0`` into left- and right-moving parts.

    The additive constant is shared equally: ``f(u0) = g(v0) = X(u0, v0) / 2``
    at the rectangle centre ``(u0, v0)``.
    """
    if len(X.vars) != 2:
        raise ValueError("expected an expression in (x, t)")
    pts_null = rect.grid(grid)
    cart = np.column_stack([(pts_null[:, 0] + pts_null[:, 1]) / 2,
                            (pts_null[:, 0] - pts_null[:, 1]) / 2])
    _, _, hess, fail = X.jets(cart)
    bad = np.flatnonzero(fail >= 0)
    if len(bad):
        raise DomainError("evaluation outside the domain", X.tape.describe(fail[bad[0]]),
                          cart[bad[0]])
    xx, tt = hess[:, 0, 0], hess[:, 1, 1]
    residual = np.abs(xx - tt) / np.maximum(1.0, np.abs(xx) + np.abs(tt))
    worst = int(np.argmax(residual))
    if residual[worst] > tol:
        raise NotWaveSolution(float(residual[worst]), cart[worst])

    u = ScalarExpr.variable("u", NULL_VARS)
    v = ScalarExpr.variable("v", NULL_VARS)
    Xn = X.substitute({X.vars[0]: (u + v) * 0.5, X.vars[1]: (u - v) * 0.5}, NULL_VARS)
    u0, v0 = rect.center
    half = Xn(u0, v0) / 2
    s = Var("s")
    f = Xn.substitute({"u": s, "v": v0}, ARG) - half
    g = Xn.substitute({"u": u0, "v": s}, ARG) - half
    recon = f.values(pts_null[:, :1]) + g.values(pts_null[:, 1:])
    err = float(np.abs(recon - Xn.values(pts_null)).max())
    return DalembertSplit(f, g, (u0, v0), err, float(residual[worst]))


# null lines and causal structure


@dataclass
class NullLineReport:
    passed: bool
    branch: Branch | None
    u_line_spread: float
    v_line_spread: float
    character_preserved: bool
    time_orientation: str  # "causal", "anti-causal" or "mixed"

    def to_dict(self) -> dict:
        return {"pass": self.passed, "branch": self.branch.value if self.branch else None,
                "u_line_spread": self.u_line_spread, "v_line_spread": self.v_line_spread,
                "character_preserved": self.character_preserved,
                "time_orientation": self.time_orientation}


def line_image(F: SmoothMap, which: str, level: float, rect: NullRectangle,
               count: int = 64) -> np.ndarray:
    """Image (U, V) of the null line ``u = level`` (``which='u'``) or ``v = level``."""
    _check_null_map(F)
    us, vs = NullRectangle(rect.a1, rect.a2, rect.b1, rect.b2).axes(count)
    if which == "u":
        pts = np.column_stack([np.full(count, level), vs])
    else:
        pts = np.column_stack([us, np.full(count, level)])
    return F.image(pts)


def _spread(img: np.ndarray, col: int) -> float:
    c = img[:, col]
    return float((c.max() - c.min()) / max(1.0, np.abs(c).max()))


def null_line_check(F: SmoothMap, rect: NullRectangle, tol: float = DEFAULT_TOL,
                    lines: int = 9, count: int = 64) -> NullLineReport:
    """Check that null lines go to null lines, and how causal character is carried."""
    _check_null_map(F)
    us, vs = rect.axes(lines)
    u_imgs = [line_image(F, "u", a, rect, count) for a in us]
    v_imgs = [line_image(F, "v", b, rect, count) for b in vs]
    for img in u_imgs + v_imgs:
        if not np.isfinite(img).all():
            raise DomainError("evaluation outside the domain", str(F))
    # direct: u-lines keep U fixed, v-lines keep V fixed; swapped: the other way round
    direct = (max(_spread(i, 0) for i in u_imgs), max(_spread(i, 1) for i in v_imgs))
    swapped = (max(_spread(i, 1) for i in u_imgs), max(_spread(i, 0) for i in v_imgs))
    branch = None
    if max(direct) <= tol:
        branch, spreads = Branch.DIRECT, direct
    elif max(swapped) <= tol:
        branch, spreads = Branch.SWAPPED, swapped
    else:
        spreads = direct if max(direct) <= max(swapped) else swapped

    sweep_pts = rect.grid(lines)
    G = F.to_cartesian()
    _, jac, _, fail = G.jets(F.source_to_cartesian(sweep_pts))
    G.bundle.raise_failure(sweep_pts, fail)
    probes = {CausalCharacter.SPACELIKE: np.array([1.0, 0.0]),
              CausalCharacter.TIMELIKE: np.array([0.0, 1.0]),
              CausalCharacter.NULL: np.array([1.0, 1.0])}
    preserved = True
    future = []
    for J in jac:
        for kind, vec in probes.items():
            if causal_character(MINKOWSKI, J @ vec) != kind:
                preserved = False
        future.append((J @ probes[CausalCharacter.TIMELIKE])[1] > 0)
    future = np.array(future)
    orientation = "causal" if future.all() else "anti-causal" if not future.any() else "mixed"
    passed = branch is not None and preserved and orientation != "mixed"
    return NullLineReport(passed, branch, spreads[0], spreads[1], preserved, orientation)


def check_set_equivalence(pair: MonotonePair, source_points, in_target,
                          inverse: MonotonePair | None = None, target_points=None,
                          in_source=None) -> bool:
    """Sampled test that the map induced by ``pair`` bijects one set onto another.

    Every sampled ``(u, v)`` of the source must land where ``in_target`` holds;
    with an inverse pair, every sampled target point must pull back into the
    source.
    """
    F = build_map_from_pair(pair)
    img = F.image(source_points)
    if not (np.isfinite(img).all() and np.all(in_target(img[:, 0], img[:, 1]))):
        return False
    if inverse is not None and target_points is not None and in_source is not None:
        back = build_map_from_pair(inverse).image(target_points)
        if not (np.isfinite(back).all() and np.all(in_source(back[:, 0], back[:, 1]))):
            return False
    return True

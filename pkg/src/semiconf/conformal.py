"""Conformality verdicts.

Two independent routes are provided: the Jacobian criterion
``J^T eta J = lambda * eta`` with ``lambda > 0``, and the harmonic-probe
suite, which only ever looks at d'Alembertians of compositions ``phi . F``
plus the ordering of the gradient lengths of the first and last components.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import Signature
from .diffops import SmoothMap
from .errors import (DimensionMismatch, DomainError, InsufficientSamples, NotAffine,
                     NotEtaOrthogonal)
from .expr import ScalarExpr
from .expr.scalar import _points

DEFAULT_TOL = 1e-8
LAMBDA_FLOOR = 1e-300
SINGULAR_TOL = 1e-12


@dataclass
class Witness:
    point: list
    reason: str
    matrix: list | None = None

    def to_dict(self) -> dict:
        d = {"point": [float(c) for c in self.point], "reason": self.reason}
        if self.matrix is not None:
            d["matrix"] = [[float(c) for c in row] for row in self.matrix]
        return d


@dataclass
class ConformalVerdict:
    conformal: bool
    factor: float
    residual: float
    anti_signature: bool = False
    witness: Witness | None = None

    def to_dict(self) -> dict:
        d = {"conformal": self.conformal, "factor": self.factor, "residual": self.residual,
             "anti_signature": self.anti_signature}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        return d


@dataclass
class JacobianSweep:
    """Per-sample arrays from the Jacobian route (points in the map's own frame)."""

    points: np.ndarray
    conformal: np.ndarray
    factor: np.ndarray
    residual: np.ndarray
    anti_signature: np.ndarray
    singular: np.ndarray
    metric: np.ndarray

    def verdict(self, k: int) -> ConformalVerdict:
        witness = None
        if not self.conformal[k]:
            if self.singular[k]:
                reason = "singular Jacobian"
            elif self.anti_signature[k]:
                reason = "anti-conformal (lambda < 0)"
            elif abs(self.factor[k]) <= LAMBDA_FLOOR:
                reason = "degenerate conformal factor"
            else:
                reason = "J^T eta J is not proportional to eta"
            witness = Witness(list(self.points[k]), reason, self.metric[k].tolist())
        return ConformalVerdict(bool(self.conformal[k]), float(self.factor[k]),
                                float(self.residual[k]), bool(self.anti_signature[k]), witness)

    def worst(self) -> int:
        """Index of the first failing sample, or of the largest residual if all pass."""
        bad = np.flatnonzero(~self.conformal)
        if len(bad):
            return int(bad[0])
        return int(np.argmax(self.residual))


def _cartesian_jets(F: SmoothMap, points):
    pts = _points(points, F.n)
    G = F.to_cartesian()
    cart = F.source_to_cartesian(pts)
    value, jac, hess, fail = G.jets(cart)
    bad = np.flatnonzero(fail >= 0)
    if len(bad):
        p = bad[0]
        raise DomainError("evaluation outside the domain", G.bundle.tape.describe(fail[p]),
                          pts[p])
    return pts, value, jac, hess


def jacobian_sweep(F: SmoothMap, points, tol: float = DEFAULT_TOL,
                   floor: float = LAMBDA_FLOOR) -> JacobianSweep:
    pts, _, jac, _ = _cartesian_jets(F, points)
    sig = F.sig_out
    eta = sig.eta
    signs = sig.signs
    n = sig.n
    metric = np.einsum("pji,jk,pkl->pil", jac, eta, jac)
    factor = np.einsum("i,pii->p", signs, metric) / n
    deviation = np.abs(metric - factor[:, None, None] * eta).max(axis=(1, 2))
    scale = np.maximum(np.abs(factor), floor)
    residual = deviation / scale
    jscale = np.abs(jac).max(axis=(1, 2))
    singular = np.abs(np.linalg.det(jac)) <= SINGULAR_TOL * jscale ** n
    proportional = (deviation <= tol * scale) & (np.abs(factor) > floor) & ~singular
    conformal = proportional & (factor > 0)
    anti = proportional & (factor < 0)
    return JacobianSweep(pts, conformal, factor, residual, anti, singular, metric)


def conformality_at(F: SmoothMap, p, tol: float = DEFAULT_TOL,
                    floor: float = LAMBDA_FLOOR) -> ConformalVerdict:
    """Jacobian verdict at one point.

    ``lambda`` is the eps-weighted mean of the diagonal of ``J^T eta J`` and
    the residual is ``max|J^T eta J - lambda eta| / |lambda|``.

    >>> from semiconf.core import Signature
    >>> swap = SmoothMap.from_strings(Signature(2, 1), ["t", "x"])
    >>> v = conformality_at(swap, [0.3, 0.1])
    >>> v.conformal, v.anti_signature, v.factor
    (False, True, -1.0)
    """
    return jacobian_sweep(F, [p], tol, floor).verdict(0)


# harmonic probes


@dataclass(frozen=True)
class Probe:
    id: str
    expr: ScalarExpr


def probe_family(sig: Signature) -> list:
    """Target-coordinate functions with vanishing d'Alembertian used as probes."""
    n, nu = sig.n, sig.nu
    names = tuple(f"y{i}" for i in range(1, n + 1))

    def mk(family, src):
        return Probe(f"{family}:{src}", ScalarExpr.parse(src, names))

    probes = [mk("linear", f"y{j}") for j in range(1, n + 1)]
    probes += [mk("product", f"y{j}*y{k}")
               for j in range(1, n + 1) for k in range(j + 1, n + 1)]
    if sig.indefinite:
        probes += [mk("space-sum", f"y{k}^2 + y{n}^2") for k in range(1, n - nu + 1)]
        probes += [mk("time-sum", f"y1^2 + y{k}^2") for k in range(n - nu + 1, n + 1)]
    else:
        probes += [mk("difference", f"y1^2 - y{k}^2") for k in range(2, n + 1)]
    return probes


@dataclass
class ProbeRecord:
    id: str
    expression: str
    max_residual: float
    max_normalized: float
    passed: bool

    def to_dict(self) -> dict:
        return {"id": self.id, "expression": self.expression,
                "max_residual": self.max_residual, "pass": self.passed}


@dataclass
class ProbeReport:
    probes: list
    suite_pass: bool
    gradient_condition: bool
    sample_count: int
    sample_pass: np.ndarray = field(repr=False)
    gradient_ok: np.ndarray = field(repr=False)

    @property
    def conformal(self) -> bool:
        return self.suite_pass and self.gradient_condition

    @property
    def max_residual(self) -> float:
        return max((r.max_residual for r in self.probes), default=0.0)

    def to_dict(self) -> dict:
        return {"probes": [r.to_dict() for r in self.probes], "suite_pass": self.suite_pass,
                "gradient_condition": self.gradient_condition,
                "sample_count": self.sample_count}


def probe_suite(F: SmoothMap, samples, tol: float = DEFAULT_TOL) -> ProbeReport:
    """Run every probe on ``samples`` and test the gradient ordering condition.

    A probe passes at a sample when ``|Laplacian(phi . F)|`` is at most
    ``tol * max(1, sum_i |d^2(phi . F)/dx_i^2|)``; the recorded residual is the
    raw ``max |Laplacian(phi . F)|``.
    """
    pts = _points(samples, F.n)
    G = F.to_cartesian()
    cart = F.source_to_cartesian(pts)
    sig = F.sig_out
    signs = F.sig_in.signs
    npts = len(pts)
    sample_pass = np.ones(npts, dtype=bool)
    records = []
    for probe in probe_family(sig):
        composed = G.compose(probe.expr)
        _, _, hess, fail = composed.jets(cart)
        bad = np.flatnonzero(fail >= 0)
        if len(bad):
            raise DomainError("evaluation outside the domain",
                              composed.tape.describe(fail[bad[0]]), pts[bad[0]])
        diag = np.einsum("pii->pi", hess)
        lap = diag @ signs
        normalized = np.abs(lap) / np.maximum(1.0, np.abs(diag).sum(axis=1))
        ok = normalized <= tol
        sample_pass &= ok
        records.append(ProbeRecord(probe.id, str(probe.expr),
                                   float(np.abs(lap).max(initial=0.0)),
                                   float(normalized.max(initial=0.0)), bool(ok.all())))

    _, jac, _ = _cartesian_jets(F, pts)[1:]
    if sig.indefinite:
        lengths = np.einsum("pji,i->pj", jac ** 2, signs)
        gradient_ok = lengths[:, 0] > lengths[:, -1]
    else:
        gradient_ok = np.ones(npts, dtype=bool)
    return ProbeReport(records, all(r.passed for r in records), bool(gradient_ok.all()),
                       npts, sample_pass & gradient_ok, gradient_ok)


@dataclass
class EquivalenceReport:
    probe_conformal: np.ndarray
    jacobian_conformal: np.ndarray
    probes: ProbeReport
    jacobian: JacobianSweep
    expected_agreement: bool

    @property
    def agree(self) -> np.ndarray:
        return self.probe_conformal == self.jacobian_conformal

    @property
    def all_agree(self) -> bool:
        return bool(self.agree.all())

    @property
    def conformal(self) -> bool:
        return bool(self.probe_conformal.all() and self.jacobian_conformal.all())

    def to_dict(self) -> dict:
        return {"probe_path_conformal": bool(self.probe_conformal.all()),
                "jacobian_path_conformal": bool(self.jacobian_conformal.all()),
                "agreement": self.all_agree,
                "disagreeing_samples": int((~self.agree).sum()),
                "agreement_expected": self.expected_agreement}


def check_equivalence(F: SmoothMap, samples, tol: float = DEFAULT_TOL) -> EquivalenceReport:
    """Compare the probe route with the Jacobian route sample by sample.

    In two dimensions both routes must agree.  For n >= 3 agreement is only
    guaranteed for affine maps of the whole space; disagreement is reported,
    not raised.
    """
    probes = probe_suite(F, samples, tol)
    sweep = jacobian_sweep(F, samples, tol)
    return EquivalenceReport(probes.sample_pass, sweep.conformal, probes, sweep, F.n == 2)


# affine rigidity for n >= 3


@dataclass
class AffineModel:
    alpha: float
    A: np.ndarray
    b: np.ndarray
    fit_residual: float
    orthogonality_residual: float

    @property
    def M(self) -> np.ndarray:
        return self.alpha * self.A

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.M.T + self.b

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "A": self.A.tolist(), "b": self.b.tolist(),
                "fit_residual": self.fit_residual,
                "orthogonality_residual": self.orthogonality_residual}


def liouville_fit(samples, sig: Signature, tol: float = DEFAULT_TOL) -> AffineModel:
    """Fit ``y = alpha * A x + b`` with ``A^T eta A = eta``.

    ``samples`` is a sequence of ``(x, y)`` pairs.  The affine least-squares
    problem is solved through the normal equations on centred data; ``alpha``
    is ``|det M|^(1/n)``.

    Raises
    ------
    InsufficientSamples
        Fewer than n + 1 affinely independent source points.
    NotAffine
        Relative fit residual above ``tol``.
    NotEtaOrthogonal
        ``max|A^T eta A - eta|`` above ``tol``.
    """
    pairs = list(samples)
    if not pairs:
        raise InsufficientSamples("no samples")
    X = np.array([np.asarray(p[0], dtype=float) for p in pairs])
    Y = np.array([np.asarray(p[1], dtype=float) for p in pairs])
    n = sig.n
    if X.shape[1:] != (n,) or Y.shape[1:] != (n,):
        raise DimensionMismatch(f"samples must be pairs of length-{n} vectors")
    design = np.column_stack([X, np.ones(len(X))])
    if len(X) < n + 1 or np.linalg.matrix_rank(design) < n + 1:
        raise InsufficientSamples(f"need {n + 1} affinely independent points")

    x0, y0 = X.mean(axis=0), Y.mean(axis=0)
    Xc, Yc = X - x0, Y - y0
    M = np.linalg.solve(Xc.T @ Xc, Xc.T @ Yc).T
    b = y0 - M @ x0
    fit_residual = float(np.abs(Y - (X @ M.T + b)).max() / max(1.0, np.abs(Y).max()))
    if fit_residual > tol:
        raise NotAffine(fit_residual, tol)

    det = abs(np.linalg.det(M))
    if det == 0:
        raise NotEtaOrthogonal(float("inf"), tol)
    alpha = det ** (1.0 / n)
    A = M / alpha
    orth = float(np.abs(A.T @ sig.eta @ A - sig.eta).max())
    if orth > tol:
        raise NotEtaOrthogonal(orth, tol)
    return AffineModel(float(alpha), A, b, fit_residual, orth)


@dataclass
class ScalingReport:
    alpha: float
    max_deviation: float
    ratios: np.ndarray
    vacuous: bool
    passed: bool

    def to_dict(self) -> dict:
        finite = self.ratios[np.isfinite(self.ratios)]
        return {"alpha": self.alpha, "max_deviation": self.max_deviation,
                "ratio": float(np.median(finite)) if len(finite) else None,
                "vacuous": self.vacuous, "pass": self.passed}


def scaling_check(F: SmoothMap, phi: ScalarExpr, samples, tol: float = DEFAULT_TOL,
                  model: AffineModel | None = None) -> ScalingReport:
    """Check ``Laplacian(phi . F)(p) = alpha^2 * Laplacian'(phi)(F(p))`` at each sample.

    The deviation is measured relative to ``max(1, |alpha^2 Laplacian'(phi)|)``.
    A probe whose target Laplacian vanishes at every sample makes the check
    vacuous; it still passes and is flagged.
    """
    pts = _points(samples, F.n)
    images = F.image(pts)
    if model is None:
        model = liouville_fit(zip(pts, images), F.sig_in, tol)
    lhs_vals, fail = _laplacians(F.sig_in, F.compose(phi), pts)
    rhs_vals, fail2 = _laplacians(F.sig_out, phi, images)
    if (fail >= 0).any() or (fail2 >= 0).any():
        raise DomainError("evaluation outside the domain", str(phi))
    target = model.alpha ** 2 * rhs_vals
    deviation = np.abs(lhs_vals - target) / np.maximum(1.0, np.abs(target))
    vacuous = bool((np.abs(rhs_vals) <= tol).all())
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(np.abs(rhs_vals) > tol, lhs_vals / rhs_vals, np.nan)
    max_dev = float(deviation.max(initial=0.0))
    return ScalingReport(model.alpha, max_dev, ratios, vacuous, max_dev <= tol)


def _laplacians(sig, phi, points):
    _, _, hess, fail = phi.jets(points)
    return np.einsum("i,pii->p", sig.signs, hess), fail


# Cauchy-Riemann classification on the Euclidean plane


class CRKind(enum.Enum):
    HOLOMORPHIC = "holomorphic"
    ANTI_HOLOMORPHIC = "anti-holomorphic"
    NEITHER = "neither"


@dataclass
class CRClass:
    kind: CRKind
    residual: float
    witness: Witness | None = None

    def to_dict(self) -> dict:
        d = {"class": self.kind.value, "residual": self.residual}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        return d


def classify_cr(F: SmoothMap, samples, tol: float = 1e-10) -> CRClass:
    """Holomorphic if u_x = v_y and u_y = -v_x at every sample, anti-holomorphic
    for the sign-flipped pair, otherwise neither.

    Residuals are relative to the largest Jacobian entry at each sample.
    """
    if (F.sig_in.n, F.sig_in.nu) != (2, 0):
        raise ValueError("Cauchy-Riemann classification needs signature (2, 0)")
    pts, _, jac, _ = _cartesian_jets(F, samples)
    ux, uy, vx, vy = jac[:, 0, 0], jac[:, 0, 1], jac[:, 1, 0], jac[:, 1, 1]
    scale = np.maximum(np.abs(jac).max(axis=(1, 2)), LAMBDA_FLOOR)
    holo = np.maximum(np.abs(ux - vy), np.abs(uy + vx)) / scale
    anti = np.maximum(np.abs(ux + vy), np.abs(uy - vx)) / scale
    det = ux * vy - uy * vx
    singular = np.abs(det) <= SINGULAR_TOL * scale ** 2
    if singular.any():
        k = int(np.flatnonzero(singular)[0])
        return CRClass(CRKind.NEITHER, float(min(holo.max(), anti.max())),
                       Witness(list(pts[k]), "singular Jacobian", jac[k].tolist()))
    if (holo <= tol).all():
        return CRClass(CRKind.HOLOMORPHIC, float(holo.max()))
    if (anti <= tol).all():
        return CRClass(CRKind.ANTI_HOLOMORPHIC, float(anti.max()))
    best = np.minimum(holo, anti)
    k = int(np.argmax(best))
    return CRClass(CRKind.NEITHER, float(min(holo.max(), anti.max())),
                   Witness(list(pts[k]), "Cauchy-Riemann relations fail", jac[k].tolist()))

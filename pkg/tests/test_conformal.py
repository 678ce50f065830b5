import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiconf.conformal import (
    CRKind, check_equivalence, classify_cr, conformality_at, jacobian_sweep,
    liouville_fit, probe_family, probe_suite, scaling_check,
)
from semiconf.core import Signature
from semiconf.diffops import NULL, SmoothMap, default_vars
from semiconf.errors import InsufficientSamples, NotAffine, NotEtaOrthogonal
from semiconf.expr import parse

from oracles import affine_components, boost, random_eta_orthogonal

MINK = Signature(2, 1)
EUCL = Signature(2, 0)
rng = np.random.default_rng(7)
SQUARE = rng.uniform(-0.9, 0.9, (25, 2))


def compactification_null():
    return SmoothMap.from_strings(MINK, ["(2/pi)*atan(u)", "(2/pi)*atan(v)"], frame=NULL)


def affine_map(sig, M, b):
    names = default_vars(sig)
    return SmoothMap.from_strings(sig, affine_components(M, b, names), vars=names)


# --- Jacobian route ---

def test_identity_conformal():
    v = conformality_at(SmoothMap.identity(MINK), (0.4, -1.2))
    assert v.conformal and v.factor == 1 and v.residual == 0 and not v.anti_signature


def test_swap_anti_signature():
    v = conformality_at(SmoothMap.from_strings(MINK, ["t", "x"]), (0.3, 0.1))
    assert not v.conformal and v.anti_signature
    assert v.factor == -1
    assert v.witness.reason == "anti-conformal (lambda < 0)"
    assert v.witness.matrix == [[-1, 0], [0, 1]]


def test_compactification_factor_at_origin():
    v = conformality_at(compactification_null(), (0, 0))
    assert v.conformal
    assert v.factor == pytest.approx((2 / math.pi) ** 2, rel=1e-15)
    assert v.factor == pytest.approx(0.4052847346, abs=1e-10)


def test_singular_jacobian_witness():
    F = SmoothMap.from_strings(MINK, ["x^3", "t"])
    v = conformality_at(F, (0, 0.5))
    assert not v.conformal and v.witness.reason == "singular Jacobian"


def test_not_proportional_witness():
    v = conformality_at(SmoothMap.from_strings(MINK, ["2*x", "t"]), (0, 0))
    assert not v.conformal and not v.anti_signature
    assert v.residual > 0.1


@settings(deadline=None)
@given(st.floats(0.3, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_lorentz_similarity_conformal(alpha, rapidity, shift):
    M = alpha * boost(2, 0, 1, rapidity)
    v = conformality_at(affine_map(MINK, M, [shift, 0]), (0.1, 0.2))
    assert v.conformal
    assert v.factor == pytest.approx(alpha ** 2, rel=1e-12)


@settings(deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(3, 1), (4, 2), (3, 0), (4, 1)]))
def test_verdict_invariants(seed, shape):
    sig = Signature(*shape)
    r = np.random.default_rng(seed)
    M = r.normal(size=(sig.n, sig.n))
    if r.integers(2):
        M = r.uniform(0.5, 2) * random_eta_orthogonal(r, sig.n, sig.nu)
    sweep = jacobian_sweep(affine_map(sig, M, np.zeros(sig.n)), r.normal(size=(4, sig.n)))
    assert not (sweep.conformal & sweep.anti_signature).any()
    assert (sweep.factor[sweep.conformal] > 0).all()
    assert (sweep.residual[sweep.conformal] <= 1e-8).all()


# --- probe route ---

@pytest.mark.parametrize("shape, count", [((2, 1), 5), ((2, 0), 4), ((3, 1), 9),
                                          ((4, 2), 14), ((4, 0), 13)])
def test_probe_family_size(shape, count):
    assert len(probe_family(Signature(*shape))) == count


def test_probe_family_members():
    ids = [p.id for p in probe_family(Signature(3, 1))]
    assert "space-sum:y1^2 + y3^2" in ids and "space-sum:y2^2 + y3^2" in ids
    assert "time-sum:y1^2 + y3^2" in ids
    assert [p.id for p in probe_family(EUCL)][-1] == "difference:y1^2 - y2^2"


@pytest.mark.parametrize("shape", [(2, 1), (2, 0), (3, 1), (4, 2), (3, 3)])
def test_identity_passes_probe_suite(shape):
    sig = Signature(*shape)
    rep = probe_suite(SmoothMap.identity(sig), rng.normal(size=(6, sig.n)))
    assert rep.suite_pass and rep.gradient_condition


def test_swap_passes_probes_but_not_gradient_condition():
    rep = probe_suite(SmoothMap.from_strings(MINK, ["t", "x"]), SQUARE)
    assert rep.suite_pass and not rep.gradient_condition
    assert rep.max_residual == 0


def test_null_frame_pair_passes_probes():
    F = SmoothMap.from_strings(MINK, ["u^3 + u", "tanh(v)"], frame=NULL)
    rep = probe_suite(F, SQUARE)
    assert rep.suite_pass and rep.gradient_condition
    assert jacobian_sweep(F, SQUARE).conformal.all()


def test_shear_fails_product_probe():
    F = SmoothMap.from_strings(MINK, ["u + v", "v"], frame=NULL)
    rep = probe_suite(F, SQUARE)
    assert not rep.suite_pass
    failing = {r.id for r in rep.probes if not r.passed}
    assert "product:y1*y2" in failing


# --- equivalence ---

def test_equivalence_compactification():
    eq = check_equivalence(compactification_null(), SQUARE)
    assert eq.all_agree and eq.conformal and eq.expected_agreement


def test_equivalence_swap():
    eq = check_equivalence(SmoothMap.from_strings(MINK, ["t", "x"]), SQUARE)
    assert eq.all_agree and not eq.probe_conformal.any()
    assert eq.probes.suite_pass and not eq.probes.gradient_condition
    assert eq.jacobian.anti_signature.all()


def test_equivalence_shear():
    F = SmoothMap.from_strings(MINK, ["u + v", "v"], frame=NULL)
    eq = check_equivalence(F, SQUARE)
    assert eq.all_agree and not eq.jacobian_conformal.any() and not eq.probe_conformal.any()


def test_equivalence_nonaffine_higher_dim_reported():
    sig = Signature(3, 1)
    F = SmoothMap.from_strings(sig, ["x1^3", "x2", "x3"])
    eq = check_equivalence(F, rng.uniform(0.5, 1, (5, 3)))
    assert not eq.expected_agreement
    assert not eq.jacobian_conformal.any()


# --- Liouville fit and scaling ---

def _samples(M, b, count=12, n=3, seed=0):
    X = np.random.default_rng(seed).uniform(-2, 2, (count, n))
    return X, X @ M.T + b


def test_fit_boost_round_trip():
    B = boost(3, 0, 2, 0.5)
    b = np.array([1.0, 0, 0])
    X, Y = _samples(2 * B, b)
    m = liouville_fit(zip(X, Y), Signature(3, 1))
    assert m.alpha == pytest.approx(2, abs=1e-8)
    assert np.allclose(m.A, B, atol=1e-8)
    assert np.allclose(m.b, b, atol=1e-8)


def test_fit_identity():
    X, Y = _samples(np.eye(3), np.zeros(3))
    m = liouville_fit(zip(X, Y), Signature(3, 1))
    assert m.alpha == pytest.approx(1, abs=1e-12)
    assert np.allclose(m.A, np.eye(3), atol=1e-12) and np.allclose(m.b, 0, atol=1e-12)


def test_fit_cube_not_affine():
    X = rng.uniform(-2, 2, (20, 3))
    with pytest.raises(NotAffine):
        liouville_fit(zip(X, X ** 3), Signature(3, 1))


def test_fit_not_eta_orthogonal():
    X, Y = _samples(np.diag([1.0, 2.0, 1.0]), np.zeros(3))
    with pytest.raises(NotEtaOrthogonal):
        liouville_fit(zip(X, Y), Signature(3, 1))


def test_fit_insufficient_samples():
    X = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0.0]])
    with pytest.raises(InsufficientSamples):
        liouville_fit(zip(X, X), Signature(3, 1))
    with pytest.raises(InsufficientSamples):
        liouville_fit([], Signature(3, 1))


@settings(deadline=None, max_examples=30)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(3, 1), (4, 2)]))
def test_fit_recovers_random_similarity(seed, shape):
    sig = Signature(*shape)
    r = np.random.default_rng(seed)
    alpha = r.uniform(0.5, 4)
    A = random_eta_orthogonal(r, sig.n, sig.nu)
    b = r.normal(size=sig.n)
    X, Y = _samples(alpha * A, b, count=3 * sig.n, n=sig.n, seed=seed)
    m = liouville_fit(zip(X, Y), sig)
    assert m.alpha == pytest.approx(alpha, rel=1e-8)
    assert np.abs(m.A.T @ sig.eta @ m.A - sig.eta).max() <= 1e-8


def test_scaling_ratio_four():
    sig = Signature(3, 1)
    F = affine_map(sig, 2 * boost(3, 0, 2, 0.5), [1, 0, 0])
    rep = scaling_check(F, parse("y1^2", ("y1", "y2", "y3")), rng.normal(size=(10, 3)))
    assert rep.passed and not rep.vacuous
    assert np.allclose(rep.ratios, 4, rtol=1e-9, atol=0)


def test_scaling_isometry():
    sig = Signature(3, 1)
    F = affine_map(sig, boost(3, 1, 2, -0.3), [0, 2, 0])
    rep = scaling_check(F, parse("y1^2 + 2*y3^2", ("y1", "y2", "y3")), rng.normal(size=(10, 3)))
    assert rep.passed and np.allclose(rep.ratios, 1, rtol=1e-9, atol=0)


def test_scaling_linear_probe_vacuous():
    sig = Signature(3, 1)
    F = affine_map(sig, 2 * np.eye(3), [0, 0, 0])
    rep = scaling_check(F, parse("y1 - y3", ("y1", "y2", "y3")), rng.normal(size=(10, 3)))
    assert rep.passed and rep.vacuous


# --- Cauchy-Riemann ---

@pytest.mark.parametrize("comps, kind", [
    (["x^2 - y^2", "2*x*y"], CRKind.HOLOMORPHIC),
    (["x^3 - 3*x*y^2", "3*x^2*y - y^3"], CRKind.HOLOMORPHIC),
    (["exp(x)*cos(y)", "exp(x)*sin(y)"], CRKind.HOLOMORPHIC),
    (["x", "-y"], CRKind.ANTI_HOLOMORPHIC),
    (["x^2 - y^2", "-2*x*y"], CRKind.ANTI_HOLOMORPHIC),
    (["2*x", "y"], CRKind.NEITHER),
    (["x + y", "y"], CRKind.NEITHER),
])
def test_classify_cr(comps, kind):
    pts = rng.uniform(0.2, 1.5, (100, 2))
    c = classify_cr(SmoothMap.from_strings(EUCL, comps), pts)
    assert c.kind == kind
    if kind != CRKind.NEITHER:
        assert c.residual <= 1e-10
    else:
        assert c.witness is not None


def test_classify_cr_singular():
    c = classify_cr(SmoothMap.from_strings(EUCL, ["x^2 - y^2", "2*x*y"]), [[0.0, 0.0]])
    assert c.kind == CRKind.NEITHER and c.witness.reason == "singular Jacobian"


def test_classify_cr_requires_euclidean_plane():
    with pytest.raises(ValueError):
        classify_cr(SmoothMap.identity(MINK), [[0.0, 0.0]])


def test_doctests():
    import doctest

    import semiconf.conformal

    assert doctest.testmod(semiconf.conformal).failed == 0

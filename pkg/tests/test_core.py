import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiconf.core import CausalCharacter, Signature, causal_character, eta_inner
from semiconf.errors import DimensionMismatch

MINK = Signature(2, 1)
finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_signature_signs():
    sig = Signature(4, 2)
    assert [sig.epsilon(i) for i in range(1, 5)] == [1, 1, -1, -1]
    assert np.array_equal(sig.eta, np.diag([1.0, 1.0, -1.0, -1.0]))
    assert sig.to_dict() == {"n": 4, "nu": 2}
    assert Signature.from_dict({"n": 4, "nu": 2}) == sig


@pytest.mark.parametrize("n, nu", [(0, 0), (2, 3), (2, -1), (1.5, 0)])
def test_signature_rejects_bad_index(n, nu):
    with pytest.raises(ValueError):
        Signature(n, nu)


@pytest.mark.parametrize("a, b, expected", [
    ((1, 0), (1, 0), 1.0),
    ((0, 1), (0, 1), -1.0),
    ((1, 1), (1, 1), 0.0),
])
def test_eta_inner_examples(a, b, expected):
    assert eta_inner(MINK, a, b) == expected


def test_eta_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        eta_inner(MINK, (1, 0, 0), (1, 0))


@pytest.mark.parametrize("v, expected", [
    ((1, 1), CausalCharacter.NULL),
    ((2, 1), CausalCharacter.SPACELIKE),
    ((0, 3), CausalCharacter.TIMELIKE),
])
def test_causal_character_examples(v, expected):
    assert causal_character(MINK, v, 1e-12) == expected


def test_causal_character_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        causal_character(MINK, (1, 2, 3))


@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3),
       st.lists(finite, min_size=3, max_size=3))
def test_eta_symmetric_bilinear(a, b, c):
    sig = Signature(3, 1)
    assert eta_inner(sig, a, b) == eta_inner(sig, b, a)
    lhs = eta_inner(sig, np.add(a, c), b)
    rhs = eta_inner(sig, a, b) + eta_inner(sig, c, b)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + np.abs(a).sum() + np.abs(c).sum()) ** 2)


@given(st.lists(finite, min_size=3, max_size=3))
def test_definite_is_positive(v):
    q = eta_inner(Signature(3, 0), v, v)
    assert q >= 0
    if max(map(abs, v)) > 1e-150:  # below this the squares underflow
        assert q > 0


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2),
       st.floats(0.01, 100) | st.floats(-100, -0.01))
def test_causal_character_scale_invariant(v, k):
    if not any(v):
        return
    assert causal_character(MINK, v) == causal_character(MINK, np.multiply(v, k))

"""Flat semi-Euclidean metric structure on R^n_nu."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

NULL_TOL = 1e-10


@dataclass(frozen=True)
class Signature:
    """Dimension ``n`` and index ``nu`` (number of minus signs, placed last)."""

    n: int
    nu: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n!r}")
        if int(self.nu) != self.nu or not 0 <= self.nu <= self.n:
            raise ValueError(f"index must lie in [0, {self.n}], got {self.nu!r}")

    def epsilon(self, i: int) -> int:
        """Sign of the i-th coordinate, 1-indexed."""
        if not 1 <= i <= self.n:
            raise IndexError(i)
        return 1 if i <= self.n - self.nu else -1

    @property
    def signs(self) -> np.ndarray:
        return np.array([1.0] * (self.n - self.nu) + [-1.0] * self.nu)

    @property
    def eta(self) -> np.ndarray:
        return np.diag(self.signs)

    @property
    def indefinite(self) -> bool:
        return self.nu not in (0, self.n)

    def to_dict(self) -> dict:
        return {"n": self.n, "nu": self.nu}

    @classmethod
    def from_dict(cls, d) -> "Signature":
        return cls(int(d["n"]), int(d["nu"]))


class CausalCharacter(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"


def _as_vec(sig: Signature, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (sig.n,):
        raise DimensionMismatch(f"expected a vector of length {sig.n}, got shape {v.shape}")
    return v


def eta_inner(sig: Signature, a, b) -> float:
    a = _as_vec(sig, a)
    b = _as_vec(sig, b)
    return float(np.sum(sig.signs * a * b))


def causal_character(sig: Signature, v, tol: float = NULL_TOL) -> CausalCharacter:
    """Classify ``v`` by the sign of eta(v, v).

    The null test is relative: ``|eta(v, v)| <= tol * |v|^2`` counts as null,
    so the answer does not change when ``v`` is rescaled.
    """
    v = _as_vec(sig, v)
    q = eta_inner(sig, v, v)
    if abs(q) <= tol * float(v @ v):
        return CausalCharacter.NULL
    return CausalCharacter.SPACELIKE if q > 0 else CausalCharacter.TIMELIKE

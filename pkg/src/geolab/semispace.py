"""Linear algebra over flat semi-Euclidean spaces.

A space of signature (n, k) carries the indefinite inner product with n
positive directions first and k negative directions last.  Minkowski
space is the k = 1 case with the time coordinate in the last slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

# Scale factor for classifying a vector as null; exact nullity is not
# representable in floats.
NULL_EPS = 1e-9


@dataclass(frozen=True)
class SemiSpace:
    """Dimension/signature descriptor: n positive directions, then k negative."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.k < 0:
            raise ValueError(f"invalid signature ({self.n}, {self.k})")

    @property
    def dim(self) -> int:
        return self.n + self.k

    @property
    def signs(self) -> np.ndarray:
        return np.concatenate([np.ones(self.n), -np.ones(self.k)])

    def check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatch(
                f"vector of shape {v.shape} in space of dimension {self.dim}"
            )
        return v


def inner(space: SemiSpace, a, b) -> float:
    """Indefinite inner product: sum over positive slots minus sum over
    negative slots."""
    a = space.check(a)
    b = space.check(b)
    return float(np.dot(a * space.signs, b))


def euclid_flip(space: SemiSpace, w) -> np.ndarray:
    """Negate the k trailing coordinates.

    Converts the indefinite pairing to the Euclidean dot product:
    inner(w, x) == flip(w) . x for every x.  An involution.
    """
    w = space.check(w)
    return w * space.signs


def causal_character(space: SemiSpace, v) -> str:
    """Classify v as 'spacelike', 'timelike', 'null' or 'zero'.

    Vectors with |<v,v>| below NULL_EPS * max(1, |v|^2) count as null.
    """
    v = space.check(v)
    if not v.any():
        return "zero"
    q = inner(space, v, v)
    eps = NULL_EPS * max(1.0, float(np.dot(v, v)))
    if abs(q) <= eps:
        return "null"
    return "spacelike" if q > 0 else "timelike"

"""Statistical distances between outcome distributions (base-2 logs)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["BinaryDistribution", "InfiniteDivergence", "kl", "jsd", "accuracy",
           "tvd", "tvd_bound"]

_NORM_TOL = 1e-12


class InfiniteDivergence(ArithmeticError):
    """KL divergence is infinite because ``q`` has zero mass where ``p`` does not."""


@dataclass(frozen=True)
class BinaryDistribution:
    """Outcome frequencies ``(p0, p1)`` of a single qubit."""

    p0: float
    p1: float

    def __post_init__(self):
        if self.p0 < 0 or self.p1 < 0 or abs(self.p0 + self.p1 - 1.0) > _NORM_TOL:
            raise ValueError(f"not a distribution: ({self.p0!r}, {self.p1!r})")

    @classmethod
    def from_counts(cls, ones: int, total: int) -> "BinaryDistribution":
        if total <= 0 or not 0 <= ones <= total:
            raise ValueError(f"invalid counts: {ones} ones of {total}")
        return cls((total - ones) / total, ones / total)

    @classmethod
    def from_p1(cls, p1: float) -> "BinaryDistribution":
        return cls(1.0 - p1, p1)

    def __array__(self, dtype=None, copy=None):
        return np.array([self.p0, self.p1], dtype=dtype)

    def __iter__(self):
        return iter((self.p0, self.p1))


def _as_pair(p, q):
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise ValueError(f"support mismatch: {p.size} vs {q.size}")
    return p, q


def _kl(p, q):
    mask = (p > 0) & (q > 0)
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def kl(p, q) -> float:
    """Kullback-Leibler divergence ``D(p || q)`` in bits.

    Raises
    ------
    InfiniteDivergence
        If some outcome has ``p_i > 0`` and ``q_i = 0``.
    """
    p, q = _as_pair(p, q)
    if np.any((q == 0) & (p > 0)):
        raise InfiniteDivergence("q has zero probability where p does not")
    return max(_kl(p, q), 0.0)


def jsd(p, q) -> float:
    """Jensen-Shannon distance, the square root of the JS divergence, in [0, 1]."""
    p, q = _as_pair(p, q)
    m = 0.5 * (p + q)
    div = 0.5 * (_kl(p, m) + _kl(q, m))
    return math.sqrt(min(max(div, 0.0), 1.0))


def accuracy(results) -> float:
    """Fraction of results whose prediction equals the ground truth."""
    results = list(results)
    if not results:
        raise ValueError("accuracy of an empty result list")
    if any(r.truth is None for r in results):
        raise ValueError("every result needs a ground-truth label")
    return sum(r.predicted == r.truth for r in results) / len(results)


def tvd(p, q) -> float:
    """Total variation distance."""
    p, q = _as_pair(p, q)
    return 0.5 * float(np.abs(p - q).sum())


def tvd_bound(shots: int, support: int, confidence: float = 0.999) -> float:
    """TVD radius that the empirical distribution stays within w.p. >= ``confidence``.

    From ``P(||p_hat - p||_1 >= eps) <= 2**k * exp(-n eps**2 / 2)``
    (Bretagnolle-Huber-Carol).
    """
    delta = 1.0 - confidence
    eps = math.sqrt(2.0 * (support * math.log(2.0) + math.log(1.0 / delta)) / shots)
    return eps / 2.0

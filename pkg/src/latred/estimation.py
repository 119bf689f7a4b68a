"""Babai nearest-plane estimates, their success probability, and a small ILS oracle."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import round_half_away

__all__ = [
    "BabaiResult",
    "BoxConstraint",
    "babai",
    "reduced_babai",
    "clamp_to_box",
    "phi",
    "success_probability",
    "ils_brute_force",
]

MAX_ILS_DIM = 6
MAX_ILS_POINTS = 10**6


@dataclass
class BabaiResult:
    """Estimate ``x = Z @ z`` together with the reduced-domain point z and the centers c.

    For batched input every field has one column per target vector.
    """

    x: np.ndarray
    z: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class BoxConstraint:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.int64)
        hi = np.asarray(self.upper, dtype=np.int64)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds differ in length")
        if np.any(lo > hi):
            raise ValueError("box has lower > upper in some coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def uniform(cls, n: int, lo: int, hi: int) -> "BoxConstraint":
        return cls(np.full(n, lo), np.full(n, hi))

    @property
    def volume(self) -> int:
        return math.prod(int(h - l + 1) for l, h in zip(self.lower, self.upper))


def babai(R, y_t) -> BabaiResult:
    """Nearest-plane back substitution with round-half-away-from-zero.

    ``y_t`` may be a vector of length n or an n x V array of V targets.
    """
    R = np.asarray(R, dtype=float)
    y = np.asarray(y_t, dtype=float)
    n = R.shape[0]
    if y.shape[0] != n:
        raise ValueError(f"target has length {y.shape[0]}, expected {n}")
    c = np.empty_like(y)
    x = np.empty_like(y)
    for i in range(n - 1, -1, -1):
        c[i] = (y[i] - R[i, i + 1 :] @ x[i + 1 :]) / R[i, i]
        x[i] = round_half_away(c[i])
    x = x.astype(np.int64)
    return BabaiResult(x=x, z=x.copy(), c=c)


def reduced_babai(state, y_t) -> BabaiResult:
    """Babai point of the reduced system, mapped back through Z.

    ``y_t`` is the target in the coordinates of the unreduced R (i.e. Q1^T y).
    """
    y_bar = state.Q.T @ np.asarray(y_t, dtype=float)
    res = babai(state.R, y_bar)
    return BabaiResult(x=state.Z @ res.z, z=res.z, c=res.c)


def clamp_to_box(x, box: BoxConstraint) -> np.ndarray:
    x = np.asarray(x)
    lo, hi = box.lower, box.upper
    if x.ndim == 2:
        lo, hi = lo[:, None], hi[:, None]
    return np.minimum(np.maximum(x, lo), hi)


def phi(r: float, sigma: float) -> float:
    """Probability that a N(0, sigma^2) sample lies within |r|/2 of zero."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return math.erf(abs(r) / (2.0 * math.sqrt(2.0) * sigma))


def success_probability(R, sigma: float) -> float:
    """Probability that the Babai point of R recovers the true integer vector."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return math.prod(phi(r, sigma) for r in np.diag(np.asarray(R, dtype=float)))


def ils_brute_force(R, y_t, box: BoxConstraint) -> np.ndarray:
    """Exhaustive box-constrained ILS for tiny problems (n <= 6, at most 10^6 points).

    Ties are resolved in favour of the lexicographically smallest point.
    """
    R = np.asarray(R, dtype=float)
    y = np.asarray(y_t, dtype=float)
    n = R.shape[0]
    if n > MAX_ILS_DIM or box.volume > MAX_ILS_POINTS:
        raise ValueError(
            f"search space too large: n={n}, {box.volume} points "
            f"(limits {MAX_ILS_DIM}, {MAX_ILS_POINTS})"
        )
    axes = [np.arange(l, h + 1) for l, h in zip(box.lower, box.upper)]
    pts = np.array(list(itertools.product(*axes)), dtype=np.int64)
    res = y[None, :] - pts @ R.T
    dist = np.einsum("ij,ij->i", res, res)
    return pts[int(np.argmin(dist))]

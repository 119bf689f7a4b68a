"""LLL-type reductions of an upper-triangular R.

Every algorithm here transforms a :class:`ReductionState` in place so that
``R_in @ Z = Q @ R`` keeps holding, with Q orthogonal and Z unimodular.

All column indices are 0-based. A "pair k" means columns k-1 and k, so the
valid range is 1 <= k <= n-1.
"""

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import apply_givens_rows, round_half_away

__all__ = [
    "Strategy",
    "ReductionState",
    "ReductionReport",
    "size_reduce_entry",
    "lovasz_violated_after_reduce",
    "swap_and_retriangularize",
    "score",
    "gfclll",
    "lll",
    "fclll",
    "efclll",
    "size_reduce_all",
    "is_lll_reduced",
    "is_effectively_lll_reduced",
]


class Strategy(enum.Enum):
    """Greedy column-pair selection rule."""

    G1 = 1  # diagonal ratio |r_{k-1,k-1}| / |rbar_{k-1,k-1}|
    G2 = 2  # inverse-diagonal gap 1/|r_kk| - 1/|rbar_kk|


@dataclass
class ReductionState:
    R: np.ndarray
    Q: np.ndarray
    Z: np.ndarray
    scores: np.ndarray
    perm_count: int = 0

    @classmethod
    def from_upper(cls, R) -> "ReductionState":
        """Start a reduction of R with Q = I and Z = I."""
        R = np.array(R, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError(f"R must be square, got shape {R.shape}")
        n = R.shape[0]
        if np.any(np.tril(R, -1) != 0.0):
            raise ValueError("R must be upper triangular")
        if np.any(np.diag(R) == 0.0):
            raise ValueError("R must have a nonzero diagonal")
        return cls(
            R=R,
            Q=np.eye(n),
            Z=np.eye(n, dtype=np.int64),
            scores=np.zeros(n),
        )

    @property
    def n(self) -> int:
        return self.R.shape[0]

    def copy(self) -> "ReductionState":
        return ReductionState(
            R=self.R.copy(),
            Q=self.Q.copy(),
            Z=self.Z.copy(),
            scores=self.scores.copy(),
            perm_count=self.perm_count,
        )


@dataclass
class ReductionReport:
    permutations_performed: int = 0
    sweeps_performed: int = 0
    lovasz_tests: int = 0
    terminated_early: bool = False
    wall_time: float = 0.0
    swapped_pairs: list = field(default_factory=list)


def _check_delta(delta):
    if not 0.25 < delta <= 1.0:
        raise ValueError(f"delta must lie in (1/4, 1], got {delta}")


def size_reduce_entry(state: ReductionState, i: int, k: int) -> int:
    """Make |r_ik| <= |r_ii|/2 with the column operation col_k -= mu * col_i.

    Returns the integer multiplier mu (0 means nothing changed).
    """
    R = state.R
    q = R[i, k] / R[i, i]
    if -0.5 < q < 0.5:
        return 0
    mu = round_half_away(q)
    R[: i + 1, k] -= mu * R[: i + 1, i]
    mu = int(mu)
    state.Z[:, k] -= mu * state.Z[:, i]
    return mu


def _reduced_superdiag(R, k):
    a = R[k - 1, k - 1]
    b = R[k - 1, k]
    return b - round_half_away(b / a) * a


def lovasz_violated_after_reduce(R, k: int, delta: float = 1.0) -> bool:
    """True if the Lovasz condition at pair k fails even after size-reducing r_{k-1,k}."""
    _check_delta(delta)
    return bool(_violated(R, k, delta))


def _violated(R, k, delta):
    a = R[k - 1, k - 1]
    c = R[k, k]
    b = _reduced_superdiag(R, k)
    return delta * a * a > b * b + c * c


def swap_and_retriangularize(state: ReductionState, k: int) -> None:
    """Swap columns k-1 and k of R and Z, then restore triangularity.

    The caller is expected to have size-reduced r_{k-1,k} beforehand.
    """
    R, Z = state.R, state.Z
    R[:, [k - 1, k]] = R[:, [k, k - 1]]
    Z[:, [k - 1, k]] = Z[:, [k, k - 1]]
    apply_givens_rows(R, state.Q, k)
    state.perm_count += 1


def score(R, k: int, delta: float, strategy: Strategy) -> float:
    """Greedy score of pair k; zero when swapping would not be an LLL step."""
    if not _violated(R, k, delta):
        return 0.0
    a = abs(R[k - 1, k - 1])
    c = abs(R[k, k])
    b = _reduced_superdiag(R, k)
    new_a = math.hypot(b, c)
    if strategy is Strategy.G1:
        return a / new_a
    new_c = a * c / new_a
    return 1.0 / c - 1.0 / new_c


def _refresh_scores(state, ks, delta, strategy):
    n = state.n
    for k in ks:
        if 1 <= k <= n - 1:
            state.scores[k] = score(state.R, k, delta, strategy)


def size_reduce_all(state: ReductionState) -> None:
    """Full size reduction: every r_ik with i < k brought into [-|r_ii|/2, |r_ii|/2]."""
    for k in range(1, state.n):
        for i in range(k - 1, -1, -1):
            size_reduce_entry(state, i, k)


def gfclll(
    state: ReductionState,
    strategy: Strategy,
    N=None,
    delta: float = 1.0,
    final_size_reduction: bool = False,
    on_swap=None,
) -> ReductionReport:
    """Greedy fixed-complexity LLL.

    At each of at most N steps the pair with the largest cached score is
    size-reduced, swapped and re-triangularized; only the scores of the
    neighbouring pairs are recomputed afterwards. The loop stops early once
    every score is zero (R is then LLL reduced up to size reduction).

    Args:
      state: reduction state, modified in place.
      strategy: Strategy.G1 or Strategy.G2.
      N: maximum number of column permutations; None means no cap.
      delta: Lovasz parameter in (1/4, 1].
      final_size_reduction: run a full size reduction before returning.
      on_swap: optional callable ``on_swap(k, R_before, R_after)`` invoked
        after every permutation with copies of R.

    Returns:
      ReductionReport with the number of permutations performed.
    """
    _check_delta(delta)
    if N is not None and N < 0:
        raise ValueError(f"N must be nonnegative, got {N}")
    strategy = Strategy(strategy)
    t0 = time.perf_counter()
    report = ReductionReport()
    n = state.n

    state.scores[:] = 0.0
    _refresh_scores(state, range(1, n), delta, strategy)

    it = 0
    while N is None or it < N:
        it += 1
        j = int(np.argmax(state.scores))  # first index on ties
        if state.scores[j] <= 0.0:
            report.terminated_early = True
            break
        before = state.R.copy() if on_swap is not None else None
        size_reduce_entry(state, j - 1, j)
        swap_and_retriangularize(state, j)
        report.permutations_performed += 1
        report.swapped_pairs.append(j)
        _refresh_scores(state, (j - 1, j, j + 1), delta, strategy)
        if on_swap is not None:
            on_swap(j, before, state.R.copy())

    if final_size_reduction:
        size_reduce_all(state)
    report.wall_time = time.perf_counter() - t0
    return report


def _lovasz_fails(R, k, delta):
    a = R[k - 1, k - 1]
    b = R[k - 1, k]
    c = R[k, k]
    return delta * a * a > b * b + c * c


def lll(state: ReductionState, delta: float = 1.0) -> ReductionReport:
    """Textbook LLL on R, moving the column pointer back after each swap."""
    _check_delta(delta)
    t0 = time.perf_counter()
    report = ReductionReport()
    n = state.n
    k = 1
    while k < n:
        for i in range(k - 1, -1, -1):
            size_reduce_entry(state, i, k)
        report.lovasz_tests += 1
        if _lovasz_fails(state.R, k, delta):
            swap_and_retriangularize(state, k)
            report.permutations_performed += 1
            report.swapped_pairs.append(k)
            k = max(k - 1, 1)
        else:
            k += 1
    report.wall_time = time.perf_counter() - t0
    return report


def _sweeps(state, J, delta, full):
    _check_delta(delta)
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    t0 = time.perf_counter()
    report = ReductionReport()
    n = state.n
    for _ in range(J):
        for k in range(1, n):
            if full:
                for i in range(k - 1, -1, -1):
                    size_reduce_entry(state, i, k)
            else:
                size_reduce_entry(state, k - 1, k)
            report.lovasz_tests += 1
            if _lovasz_fails(state.R, k, delta):
                swap_and_retriangularize(state, k)
                report.permutations_performed += 1
                report.swapped_pairs.append(k)
        report.sweeps_performed += 1
    report.wall_time = time.perf_counter() - t0
    return report


def fclll(state: ReductionState, J: int = 1, delta: float = 1.0) -> ReductionReport:
    """J forward sweeps over k = 1..n-1 with full size reduction; never steps back."""
    return _sweeps(state, J, delta, full=True)


def efclll(state: ReductionState, J: int = 1, delta: float = 1.0) -> ReductionReport:
    """Like :func:`fclll` but size-reduces only the superdiagonal entry before each test.

    ``permutations_performed`` of the report is the K that sets the
    permutation budget of the greedy algorithms.
    """
    return _sweeps(state, J, delta, full=False)


def is_lll_reduced(R, delta: float = 1.0) -> bool:
    _check_delta(delta)
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    for k in range(1, n):
        for i in range(k):
            if abs(R[i, k]) > 0.5 * abs(R[i, i]):
                return False
        if _lovasz_fails(R, k, delta):
            return False
    return True


def is_effectively_lll_reduced(R, delta: float = 1.0) -> bool:
    """True if R becomes LLL reduced through size reductions alone."""
    _check_delta(delta)
    R = np.asarray(R, dtype=float)
    return not any(_violated(R, k, delta) for k in range(1, R.shape[0]))

"""Reduction algorithms. Indices are 0-based: pair k means columns k-1, k."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latred.estimation import reduced_babai, success_probability, phi
from latred.linalg import int_det, residual_norm
from latred.reduction import (
    ReductionState,
    Strategy,
    efclll,
    fclll,
    gfclll,
    is_effectively_lll_reduced,
    is_lll_reduced,
    lll,
    lovasz_violated_after_reduce,
    score,
    size_reduce_all,
    size_reduce_entry,
    swap_and_retriangularize,
)

from conftest import random_problem

R2 = [[4.0, 1.0], [0.0, 1.0]]
R3 = [[4.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]]
SQ2 = math.sqrt(2.0)


def absdiag(state):
    return np.abs(np.diag(state.R))


# --- size reduction -------------------------------------------------------

def test_size_reduce_half_tie_rounds_away():
    st_ = ReductionState.from_upper([[2.0, 3.0], [0.0, 1.0]])
    mu = size_reduce_entry(st_, 0, 1)
    assert mu == 2
    assert st_.R[0, 1] == -1.0
    np.testing.assert_array_equal(st_.Z, [[1, -2], [0, 1]])


@pytest.mark.parametrize("R", [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.4], [0.0, 1.0]]])
def test_size_reduce_noop(R):
    st_ = ReductionState.from_upper(R)
    assert size_reduce_entry(st_, 0, 1) == 0
    np.testing.assert_array_equal(st_.R, R)
    np.testing.assert_array_equal(st_.Z, np.eye(2))


def test_size_reduce_touches_only_upper_rows():
    st_ = ReductionState.from_upper([[1.0, 0.2, 3.7], [0.0, 2.0, 0.1], [0.0, 0.0, 1.0]])
    size_reduce_entry(st_, 0, 2)
    assert st_.R[0, 2] == pytest.approx(-0.3)
    assert st_.R[1, 2] == 0.1 and st_.R[2, 2] == 1.0


# --- Lovasz test ----------------------------------------------------------

@pytest.mark.parametrize(
    "R, expected",
    [
        (R2, True),  # 16 > 1 + 1
        ([[1.0, 0.0], [0.0, 1.0]], False),
        ([[1.0, 0.5], [0.0, 0.9]], False),  # 1 <= 0.25 + 0.81
    ],
)
def test_lovasz_violated_after_reduce(R, expected):
    R = np.array(R)
    before = R.copy()
    assert lovasz_violated_after_reduce(R, 1, 1.0) is expected
    np.testing.assert_array_equal(R, before)


@pytest.mark.parametrize("delta", [0.25, 0.1, 1.01])
def test_delta_range_enforced(delta):
    with pytest.raises(ValueError):
        lovasz_violated_after_reduce(np.eye(2), 1, delta)
    with pytest.raises(ValueError):
        is_lll_reduced(np.eye(2), delta)
    with pytest.raises(ValueError):
        gfclll(ReductionState.from_upper(np.eye(2)), Strategy.G1, 1, delta)


# --- swap -----------------------------------------------------------------

def test_swap_matches_hand_givens():
    st_ = ReductionState.from_upper(R2)
    swap_and_retriangularize(st_, 1)
    assert st_.R[0, 0] == pytest.approx(SQ2)
    assert st_.R[0, 1] == pytest.approx(2 * SQ2)
    assert st_.R[1, 0] == 0.0
    assert abs(st_.R[1, 1]) == pytest.approx(2 * SQ2)
    assert st_.perm_count == 1
    np.testing.assert_array_equal(st_.Z, [[0, 1], [1, 0]])


def test_swap_orthogonal_columns():
    st_ = ReductionState.from_upper([[1.0, 0.0], [0.0, 2.0]])
    swap_and_retriangularize(st_, 1)
    np.testing.assert_allclose(absdiag(st_), [2.0, 1.0])


@pytest.mark.parametrize("seed", range(10))
def test_swap_entries_follow_closed_form(seed):
    _, _, st_ = random_problem(6, seed)
    R = st_.R
    k = 1 + seed % 5
    size_reduce_entry(st_, k - 1, k)
    a, b, c = R[k - 1, k - 1], R[k - 1, k], R[k, k]
    new_a = math.hypot(b, c)
    swap_and_retriangularize(st_, k)
    assert R[k - 1, k - 1] == pytest.approx(new_a, rel=1e-12)
    assert abs(R[k, k]) == pytest.approx(abs(a * c) / new_a, rel=1e-12)
    assert R[k - 1, k] == pytest.approx(a * b / new_a, rel=1e-12, abs=1e-14)


# --- scores ---------------------------------------------------------------

def test_score_two_by_two():
    # rbar_11 = sqrt(1+1), rbar_22 = 4*1/sqrt(2)
    assert score(np.array(R2), 1, 1.0, Strategy.G1) == pytest.approx(2 * SQ2)
    assert score(np.array(R2), 1, 1.0, Strategy.G2) == pytest.approx(1 - 1 / (2 * SQ2))
    assert score(np.array(R2), 1, 1.0, Strategy.G2) == pytest.approx(0.646447, abs=1e-6)


@pytest.mark.parametrize("strategy", list(Strategy))
def test_score_zero_when_reduced(strategy):
    assert score(np.eye(2), 1, 1.0, strategy) == 0.0


def test_scores_select_different_pairs():
    R = np.array(R3)
    g1 = [score(R, k, 1.0, Strategy.G1) for k in (1, 2)]
    g2 = [score(R, k, 1.0, Strategy.G2) for k in (1, 2)]
    np.testing.assert_allclose(g1, [2 * SQ2, 2.0])
    np.testing.assert_allclose(g2, [1 - 1 / (2 * SQ2), 1.0])
    assert int(np.argmax(g1)) == 0 and int(np.argmax(g2)) == 1


def test_g1_invariant_to_column_scaling_g2_not():
    R = np.array(R2)
    S = R * 3.0
    assert score(S, 1, 1.0, Strategy.G1) == pytest.approx(score(R, 1, 1.0, Strategy.G1))
    assert score(S, 1, 1.0, Strategy.G2) == pytest.approx(score(R, 1, 1.0, Strategy.G2) / 3)


# --- GfcLLL ---------------------------------------------------------------

@pytest.mark.parametrize("N", [0, 1, 5, None])
def test_gfclll_identity(N):
    st_ = ReductionState.from_upper(np.eye(2))
    rep = gfclll(st_, Strategy.G2, N)
    assert rep.permutations_performed == 0
    assert rep.terminated_early is (N != 0)
    np.testing.assert_array_equal(st_.Z, np.eye(2))


@pytest.mark.parametrize("strategy", list(Strategy))
def test_gfclll_single_step(strategy):
    st_ = ReductionState.from_upper(R2)
    rep = gfclll(st_, strategy, 1)
    assert rep.permutations_performed == 1
    np.testing.assert_allclose(absdiag(st_), [SQ2, 2 * SQ2])


def test_gfclll_strategy_divergence():
    s1 = ReductionState.from_upper(R3)
    r1 = gfclll(s1, Strategy.G1, 1)
    assert r1.swapped_pairs == [1]
    np.testing.assert_allclose(absdiag(s1), [SQ2, 2 * SQ2, 0.5], atol=1e-12)

    s2 = ReductionState.from_upper(R3)
    r2 = gfclll(s2, Strategy.G2, 1)
    assert r2.swapped_pairs == [2]
    # |det R| = 2 is preserved, so the last entry is 1
    np.testing.assert_allclose(absdiag(s2), [4.0, 0.5, 1.0], atol=1e-12)


def test_gfclll_budget_respected():
    _, _, st_ = random_problem(16, seed=5)
    full = gfclll(st_.copy(), Strategy.G2, None)
    assert full.permutations_performed > 3
    rep = gfclll(st_, Strategy.G2, 3)
    assert rep.permutations_performed == 3
    assert not rep.terminated_early


def test_gfclll_ties_pick_smallest_index():
    R = np.diag([4.0, 1.0, 4.0, 1.0])
    R[0, 1] = R[2, 3] = 0.0
    st_ = ReductionState.from_upper(R)
    rep = gfclll(st_, Strategy.G1, 1)
    assert rep.swapped_pairs == [1]


def test_gfclll_final_size_reduction():
    _, _, st_ = random_problem(8, seed=9)
    gfclll(st_, Strategy.G2, None, final_size_reduction=True)
    assert is_lll_reduced(st_.R, 1.0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1), strategy=st.sampled_from(list(Strategy)))
def test_gfclll_score_cache_coherent(n, seed, strategy):
    _, _, st_ = random_problem(n, seed)

    def check(k, before, after):
        fresh = [0.0] + [score(st_.R, kk, 1.0, strategy) for kk in range(1, n)]
        np.testing.assert_array_equal(st_.scores, fresh)

    gfclll(st_, strategy, None, on_swap=check)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1), strategy=st.sampled_from(list(Strategy)))
def test_swaps_move_diagonal_and_raise_probability(n, seed, strategy):
    _, _, st_ = random_problem(n, seed)

    def check(k, before, after):
        assert abs(after[k - 1, k - 1]) < abs(before[k - 1, k - 1])
        assert abs(after[k, k]) > abs(before[k, k])
        p0, p1 = success_probability(before, 1.0), success_probability(after, 1.0)
        assert p1 > p0
        gain = (phi(after[k - 1, k - 1], 1.0) * phi(after[k, k], 1.0)) / (
            phi(before[k - 1, k - 1], 1.0) * phi(before[k, k], 1.0)
        )
        assert p1 / p0 == pytest.approx(gain, rel=1e-10)

    gfclll(st_, strategy, None, on_swap=check)


@pytest.mark.parametrize("n", [4, 8, 16, 32])
@pytest.mark.parametrize("strategy", list(Strategy))
def test_gfclll_generous_cap_terminates(n, strategy):
    for seed in range(5):
        _, _, st_ = random_problem(n, 1000 * n + seed)
        d = np.abs(np.diag(st_.R))
        cap = n * n * math.ceil(math.log(d.max() / d.min())) + 1
        rep = gfclll(st_, strategy, cap)
        assert rep.terminated_early
        assert rep.permutations_performed < cap
        assert is_effectively_lll_reduced(st_.R, 1.0)


# --- LLL and the sweep baselines ------------------------------------------

def test_lll_identity():
    st_ = ReductionState.from_upper(np.eye(4))
    rep = lll(st_)
    assert rep.permutations_performed == 0
    np.testing.assert_array_equal(st_.R, np.eye(4))


def test_lll_two_by_two():
    st_ = ReductionState.from_upper(R2)
    lll(st_, 1.0)
    np.testing.assert_allclose(absdiag(st_), [SQ2, 2 * SQ2])
    assert abs(st_.R[0, 1]) <= SQ2 / 2
    assert is_lll_reduced(st_.R, 1.0)


@pytest.mark.parametrize("delta", [0.75, 0.99, 1.0])
@pytest.mark.parametrize("seed", range(6))
def test_lll_random(seed, delta):
    A, Q1, st_ = random_problem(8, seed)
    det0 = np.prod(np.abs(np.diag(st_.R)))
    lll(st_, delta)
    assert is_lll_reduced(st_.R, delta)
    assert abs(int_det(st_.Z)) == 1
    assert np.prod(np.abs(np.diag(st_.R))) == pytest.approx(det0, rel=1e-10)
    assert residual_norm(A, Q1 @ st_.Q, st_.R, st_.Z) <= 1e-9 * np.linalg.norm(A)


def test_fclll_identity_counts_tests():
    st_ = ReductionState.from_upper(np.eye(5))
    rep = fclll(st_, 1)
    assert rep.permutations_performed == 0
    assert rep.lovasz_tests == 4


@pytest.mark.parametrize("J", [1, 2, 3])
def test_fclll_sweeps_and_tests(J):
    _, _, st_ = random_problem(7, seed=J)
    rep = fclll(st_, J)
    assert rep.sweeps_performed == J
    assert rep.lovasz_tests == J * 6


def test_fclll_two_by_two_matches_lll():
    a = ReductionState.from_upper(R2)
    b = ReductionState.from_upper(R2)
    rep = fclll(a, 1)
    lll(b)
    assert rep.permutations_performed == 1
    np.testing.assert_allclose(absdiag(a), absdiag(b))


def test_efclll_identity():
    assert efclll(ReductionState.from_upper(np.eye(3)), 1).permutations_performed == 0


def test_efclll_three_by_three():
    st_ = ReductionState.from_upper(R3)
    rep = efclll(st_, 1, 1.0)
    assert rep.permutations_performed == 2
    np.testing.assert_allclose(absdiag(st_), [SQ2, 0.5, 2 * SQ2], atol=1e-12)


def test_efclll_second_sweep_is_quiet():
    rep = efclll(ReductionState.from_upper(R2), 2)
    assert rep.permutations_performed == 1
    assert rep.sweeps_performed == 2


@pytest.mark.parametrize("J", [1, 2])
def test_fclll_and_efclll_agree_on_2x2(J):
    for R in (R2, [[3.0, 2.9], [0.0, 0.2]], [[1.0, 0.3], [0.0, 1.0]]):
        a = ReductionState.from_upper(R)
        b = ReductionState.from_upper(R)
        assert fclll(a, J).swapped_pairs == efclll(b, J).swapped_pairs


@pytest.mark.parametrize("J", [0, -1])
def test_sweep_count_validated(J):
    with pytest.raises(ValueError):
        fclll(ReductionState.from_upper(np.eye(2)), J)


# --- predicates -----------------------------------------------------------

def test_is_lll_reduced_examples():
    assert is_lll_reduced(np.eye(3))
    assert not is_lll_reduced(np.array(R2), 1.0)
    assert is_lll_reduced(np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0)


def test_effectively_reduced_without_size_condition():
    R = np.array([[1.0, 7.0], [0.0, 1.2]])
    assert not is_lll_reduced(R, 1.0)
    assert is_effectively_lll_reduced(R, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_lll_output_is_effectively_reduced(seed):
    _, _, st_ = random_problem(8, seed)
    lll(st_)
    assert is_effectively_lll_reduced(st_.R)


# --- invariants across all algorithms -------------------------------------

ALGOS = {
    "lll": lambda s: lll(s),
    "fclll": lambda s: fclll(s, 2),
    "efclll": lambda s: efclll(s, 2),
    "g1": lambda s: gfclll(s, Strategy.G1, 10),
    "g2": lambda s: gfclll(s, Strategy.G2, None),
}


@pytest.mark.parametrize("name", sorted(ALGOS))
@pytest.mark.parametrize("seed", range(4))
def test_algorithm_invariants(name, seed):
    A, Q1, st_ = random_problem(10, seed, m=12)
    det0 = np.prod(np.abs(np.diag(st_.R)))
    ALGOS[name](st_)
    assert abs(int_det(st_.Z)) == 1
    assert residual_norm(A, Q1 @ st_.Q, st_.R, st_.Z) <= 1e-9 * np.linalg.norm(A)
    assert np.prod(np.abs(np.diag(st_.R))) == pytest.approx(det0, rel=1e-10)
    np.testing.assert_allclose(st_.Q.T @ st_.Q, np.eye(10), atol=1e-12)
    assert np.all(np.tril(st_.R, -1) == 0)


@pytest.mark.parametrize("seed", range(30))
def test_babai_unchanged_by_extra_size_reduction(seed):
    rng = np.random.default_rng(seed)
    _, _, st_ = random_problem(4, seed)
    gfclll(st_, Strategy.G2, None)
    y = rng.standard_normal((4, 20)) * 3
    before = reduced_babai(st_, y).x
    size_reduce_all(st_)
    np.testing.assert_array_equal(reduced_babai(st_, y).x, before)


def test_state_validation():
    with pytest.raises(ValueError):
        ReductionState.from_upper([[1.0, 0.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        ReductionState.from_upper([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        ReductionState.from_upper(np.ones((2, 3)))

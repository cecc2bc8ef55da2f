import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landprice.errors import DomainError, NumericError
from landprice.scenarios import figure3_process
from landprice.stochastic_process import (
    DeterministicExponential,
    LogNormal,
    MarkovMultiplicative,
    PointMass,
    K_matrix,
    exact_condition_sum,
    mc_condition_estimate,
    overvaluation_criterion,
    sample_path,
    solve_s,
    spectral_radius,
)
from oracles import radius_2x2, solve_2x2

# frozen from the 2x2 characteristic-polynomial and cofactor oracles
FIG3_K = [[0.654079, 0.3270395], [0.33677049, 0.67354097]]


def test_deterministic_levels():
    p = sample_path(DeterministicExponential(1.1), 2)
    assert p.A_H == pytest.approx([1.0, 1.1, 1.21], rel=1e-14)
    assert p.A_X == pytest.approx([1.0, 1.0, 1.0])


def test_unit_growth_chain_is_constant():
    p = sample_path(MarkovMultiplicative([[1.0]], [[1.0]], A0=3.0), 50, seed=4)
    assert np.all(p.log_AH == math.log(3.0))


def test_figure3_increments_are_exact_growth_factors():
    p = sample_path(figure3_process(), 200, seed=12)
    inc = p.log_increments
    assert np.allclose(np.diff(p.log_AH), inc, rtol=0, atol=1e-12)
    assert set(np.unique(inc)) <= {math.log(1.1), math.log(0.95)}
    # growth is set by the state being left
    expected = np.where(p.state[:-1] == 0, math.log(1.1), math.log(0.95))
    assert np.array_equal(inc, expected)


def test_sample_path_bit_reproducible():
    a = sample_path(figure3_process(), 300, seed=99)
    b = sample_path(figure3_process(), 300, seed=99)
    c = sample_path(figure3_process(), 300, seed=100)
    assert a.log_AH.tobytes() == b.log_AH.tobytes() and np.array_equal(a.state, b.state)
    assert not np.array_equal(a.state, c.state)


def test_transition_frequencies_match_Pi():
    proc = MarkovMultiplicative([[0.9, 0.1], [0.4, 0.6]], [[1.0, 1.0], [1.0, 1.0]])
    st_ = sample_path(proc, 200_000, seed=1).state
    frm, to = st_[:-1], st_[1:]
    assert np.mean(to[frm == 0] == 1) == pytest.approx(0.1, abs=0.005)
    assert np.mean(to[frm == 1] == 0) == pytest.approx(0.4, abs=0.01)


def test_lognormal_growth_moments_match_draws():
    proc = MarkovMultiplicative([[1.0]], [[LogNormal(0.02, 0.1)]])
    inc = np.diff(sample_path(proc, 100_000, seed=3).log_AH)
    assert inc.mean() == pytest.approx(0.02, abs=1e-3)
    assert inc.std() == pytest.approx(0.1, rel=0.02)
    assert LogNormal(0.02, 0.1).moment(-0.2) == pytest.approx(np.mean(np.exp(-0.2 * inc)), rel=1e-3)


@pytest.mark.parametrize("Pi", [[[0.5, 0.6], [0.5, 0.5]], [[1.2, -0.2], [0.5, 0.5]], [[1.0, 0.0]]])
def test_invalid_transition_matrix(Pi):
    with pytest.raises(DomainError):
        MarkovMultiplicative(Pi, [[1.0, 1.0], [1.0, 1.0]])


def test_invalid_initial_state():
    with pytest.raises(DomainError):
        MarkovMultiplicative([[1.0]], [[1.1]], n0=1)


def test_K_matrix_figure3():
    K = K_matrix(figure3_process(), 1.25)
    assert K == pytest.approx(np.array(FIG3_K), abs=1e-7)


def test_K_matrix_unit_growth_and_single_state():
    Pi = [[0.3, 0.7], [0.6, 0.4]]
    assert K_matrix(MarkovMultiplicative(Pi, [[1, 1], [1, 1]]), 2.0) == pytest.approx(np.array(Pi))
    assert K_matrix(MarkovMultiplicative([[1.0]], [[1.1]]), 1.25)[0, 0] == pytest.approx(0.98112, abs=1e-5)


def test_K_matrix_lognormal_closed_form():
    K = K_matrix(MarkovMultiplicative([[1.0]], [[LogNormal(0.05, 0.2)]]), 2.0)
    assert K[0, 0] == pytest.approx(math.exp(-0.5 * 0.05 + 0.5 * (0.5 * 0.2) ** 2), rel=1e-14)


@pytest.mark.parametrize("sigma", [1.0, 0.8])
def test_K_matrix_needs_sigma_above_one(sigma):
    with pytest.raises(DomainError, match="criterion requires sigma > 1"):
        K_matrix(figure3_process(), sigma)


@pytest.mark.parametrize("K,expected", [
    (np.eye(3), 1.0),
    ([[0.5, 0.0], [0.0, 0.25]], 0.5),
    (FIG3_K, radius_2x2(FIG3_K)),
])
def test_spectral_radius_reference(K, expected):
    assert spectral_radius(K) == pytest.approx(expected, abs=1e-10)


def test_spectral_radius_figure3_value():
    assert spectral_radius(FIG3_K) == pytest.approx(0.99582, abs=1e-4)


# strictly positive entries make the Perron root simple and dominant, so the
# shifted power iteration converges geometrically
@given(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4))
@settings(max_examples=300)
def test_spectral_radius_matches_closed_form_2x2(v):
    K = np.array(v).reshape(2, 2)
    assert spectral_radius(K) == pytest.approx(radius_2x2(K), abs=1e-8)


@given(st.integers(3, 6), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=100)
def test_spectral_radius_matches_eigvals(n, seed):
    K = np.random.default_rng(seed).random((n, n))
    assert spectral_radius(K) == pytest.approx(max(abs(np.linalg.eigvals(K))), rel=1e-9)


def test_solve_s_reference():
    assert solve_s(np.zeros((2, 2))).s == pytest.approx([1.0, 1.0])
    sol = solve_s(FIG3_K)
    assert sol.s == pytest.approx(solve_2x2(FIG3_K), rel=1e-9)
    assert sol.s == pytest.approx([234.1, 244.6], abs=0.5)
    assert solve_s([[1.01]]).diverges


def test_solve_s_near_singular_warns():
    with pytest.warns(RuntimeWarning):
        sol = solve_s([[1.0 - 1e-12]])
    assert sol.ill_conditioned and not sol.diverges


@given(st.lists(st.floats(0.01, 0.6), min_size=4, max_size=4))
@settings(max_examples=300)
def test_radius_below_one_iff_positive_s(v):
    K = np.array(v).reshape(2, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_s(K)
    if sol.radius < 1:
        assert not sol.diverges and np.all(sol.s > 0)
    else:
        assert sol.diverges


def test_condition_sum_single_state_geometric():
    proc = MarkovMultiplicative([[1.0]], [[1.1]])
    q = 1.1 ** -0.2
    assert exact_condition_sum(proc, 1.25, 5000) == pytest.approx(q / (1 - q), rel=1e-9)
    assert q / (1 - q) == pytest.approx(51.97, abs=0.01)


def test_condition_sum_balanced_growth_is_T():
    assert exact_condition_sum(DeterministicExponential(1.05, 1.05), 2.0, 37) == pytest.approx(37.0)


def test_condition_sum_matches_path_enumeration():
    import itertools

    proc = figure3_process()
    T, p = 8, 1.0 / 1.25 - 1.0
    g = [math.log(1.1), math.log(0.95)]
    total = 0.0
    for seq in itertools.product([0, 1], repeat=T):
        prob, la, n, acc = 1.0, 0.0, 0, 0.0
        for n2 in seq:
            prob *= proc.Pi[n, n2]
            la += g[n]
            acc += math.exp(p * la)
            n = n2
        total += prob * acc
    assert exact_condition_sum(proc, 1.25, T) == pytest.approx(total, rel=1e-12)


def test_mc_condition_estimate_within_three_se():
    est = mc_condition_estimate(figure3_process(), 1.25, 4000, 400, seed=5)
    assert abs(est.mean - est.exact) < 3 * est.se


def test_mc_condition_estimate_chunking_invariant():
    a = mc_condition_estimate(figure3_process(), 1.25, 300, 50, seed=2, chunk=1000)
    b = mc_condition_estimate(figure3_process(), 1.25, 300, 50, seed=2, chunk=7)
    assert a.mean == b.mean and a.se == b.se


def test_overvaluation_criterion_families():
    crit = overvaluation_criterion(figure3_process(), 1.25)
    assert crit.verdict == "overvalued" and crit.radius < 1
    det = overvaluation_criterion(DeterministicExponential(1.1), 1.25)
    q = 1.1 ** -0.2
    assert det.condition_sum == pytest.approx(1 / (1 - q), rel=1e-12)
    assert overvaluation_criterion(DeterministicExponential(1.0), 1.25).verdict == "fundamental"


def test_power_iteration_nonconvergence_reports_last_iterate():
    with pytest.raises(NumericError) as info:
        # a Jordan block: the Rayleigh quotients creep in like 1/k
        spectral_radius([[0.5, 1.0], [0.0, 0.5]], max_iter=50)
    assert info.value.last_iterate is not None

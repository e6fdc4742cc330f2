import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbesim import (SchemeKind, alignment_time_mean, analyze_spec,
                    coupling_residual, p_failure, p_trans, priority_chain,
                    priority_chain_mixed, solve_pc, solve_pc_classes,
                    stationary_distribution)

from conftest import conv_spec, idle_reduction_spec, multi_spec, priority_spec


# ------------------------------------------------- stationary distribution

def test_stationary_saturated_never_blocked():
    d = stationary_distribution(p0=0.0, p_c=0.0, k=0)
    assert d.pi_states == (1.0,)
    assert d.pi_success == 1.0
    assert d.pi_failure == 0.0


def test_stationary_no_traffic():
    d = stationary_distribution(p0=1.0, p_c=0.3, k=2)
    assert d.pi_states[0] == 0.0
    assert d.pi_success == 0.0


def test_stationary_half_half():
    d = stationary_distribution(p0=0.5, p_c=0.5, k=1)
    assert d.pi_states == (0.5, 0.25)
    assert d.pi_success == pytest.approx(0.375, abs=1e-15)


def test_stationary_domain_errors():
    with pytest.raises(ValueError):
        stationary_distribution(-0.1, 0.5, 0)
    with pytest.raises(ValueError):
        stationary_distribution(0.5, 1.2, 0)
    with pytest.raises(ValueError):
        stationary_distribution(0.5, 0.5, -1)


def _chain_oracle(p0: float, p_c: float, k: int):
    """Absorbing-chain solution of the retry process via a linear system.

    Transient states: Start, 0..k.  Absorbing: Success, Drop, Null (the
    no-packet branch).  Expected visits N = (I - T)^-1 row of Start give the
    state weights; absorption probabilities give success mass.
    """
    n = k + 2  # Start + sensing states
    T = np.zeros((n, n))
    R = np.zeros((n, 3))  # success, drop, null
    T[0, 1] = 1.0 - p0
    R[0, 2] = p0
    for i in range(k + 1):
        row = 1 + i
        R[row, 0] = 1.0 - p_c
        if i < k:
            T[row, row + 1] = p_c
        else:
            R[row, 1] = p_c
    N = np.linalg.solve(np.eye(n) - T, np.eye(n))  # fundamental matrix
    visits = N[0]          # expected visits from Start
    B = N @ R
    return visits[1:], B[0, 0], B[0, 1] + B[0, 2]


@pytest.mark.parametrize("p0,p_c,k", [
    (0.99, 0.3, 0), (0.95, 0.1, 1), (0.5, 0.5, 2), (0.2, 0.9, 3), (0.0, 0.7, 3),
])
def test_stationary_matches_linear_system_oracle(p0, p_c, k):
    d = stationary_distribution(p0, p_c, k)
    visits, succ, fail = _chain_oracle(p0, p_c, k)
    assert np.allclose(d.pi_states, visits, atol=1e-12, rtol=0)
    assert abs(d.pi_success - succ) < 1e-12
    assert abs(d.pi_failure - fail) < 1e-12


@given(p0=st.floats(0, 1), p_c=st.floats(0, 1), k=st.integers(0, 20))
@settings(max_examples=300, deadline=None)
def test_stationary_conservation(p0, p_c, k):
    d = stationary_distribution(p0, p_c, k)
    assert d.pi_start == 1.0
    assert math.isclose(d.pi_success + d.pi_failure, 1.0, abs_tol=1e-12)
    assert all(0.0 <= x <= 1.0 for x in d.pi_states)
    # geometric decay across retry states
    for a, b in zip(d.pi_states, d.pi_states[1:]):
        assert b <= a + 1e-15


# ------------------------------------------------------- failure/trans forms

def test_p_failure_exponent_one_is_identity():
    assert p_failure(0.3, 1) == 0.3


def test_p_failure_power():
    assert p_failure(0.1, 4) == pytest.approx(1e-4, rel=1e-12)
    assert p_failure(0.0, 7) == 0.0


def test_p_failure_rejects_bad_args():
    with pytest.raises(ValueError):
        p_failure(0.5, 0)
    with pytest.raises(ValueError):
        p_failure(1.0001, 1)


def test_p_trans_matches_product_form():
    assert p_trans(0.99, 0.2, 2) == pytest.approx(0.01 * (1 - 0.04), rel=1e-12)


# ---------------------------------------------------------------- solve_pc

def test_solve_pc_two_ue_closed_form():
    # x = (1-p0)(1-x)  =>  x = (1-p0)/(2-p0)
    pc = solve_pc(0.99, 1, 2)
    assert abs(pc - 0.01 / 1.01) < 1e-10


def test_solve_pc_two_attempts_quadratic_oracle():
    # x = a(1-x^2) with a = 1-p0  =>  ax^2 + x - a = 0
    a = 0.01
    root = (-1 + math.sqrt(1 + 4 * a * a)) / (2 * a)
    pc = solve_pc(0.99, 2, 2)
    assert abs(pc - root) < 1e-10
    assert p_failure(pc, 2) == pytest.approx(1e-4, rel=0.05)


def test_solve_pc_trivial_cases():
    assert solve_pc(0.37, 3, 1) == 0.0
    assert solve_pc(1.0, 2, 5) == 0.0


@given(p0=st.floats(0.0, 1.0), attempts=st.integers(1, 8), q=st.integers(1, 64))
@settings(max_examples=300, deadline=None)
def test_solve_pc_residual_and_range(p0, attempts, q):
    pc = solve_pc(p0, attempts, q)
    assert 0.0 <= pc <= 1.0
    assert coupling_residual(pc, p0, attempts, q) < 1e-12


def test_solve_pc_bracketing_on_grid():
    """g(0) <= 0 <= g(1) and g non-decreasing on a 100-point scan."""
    rng = np.random.default_rng(7)
    for _ in range(50):
        p0 = float(rng.uniform(0, 1))
        attempts = int(rng.integers(1, 6))
        q = int(rng.integers(2, 32))
        def g(x):
            tau = (1 - p0) * (1 - x ** attempts)
            return x - (1 - (1 - tau) ** (q - 1))
        xs = np.linspace(0, 1, 100)
        vals = [g(x) for x in xs]
        assert vals[0] <= 1e-15 and vals[-1] >= -1e-15
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_solve_pc_monotone_in_parameters():
    grid_p0 = [0.9, 0.95, 0.99]
    grid_q = [2, 4, 8, 16]
    grid_att = [1, 2, 4]
    for att in grid_att:
        for p0 in grid_p0:
            pcs = [solve_pc(p0, att, q) for q in grid_q]
            assert all(b >= a - 1e-12 for a, b in zip(pcs, pcs[1:]))
        for q in grid_q:
            pcs = [solve_pc(p0, att, q) for p0 in grid_p0]
            assert all(b <= a + 1e-12 for a, b in zip(pcs, pcs[1:]))
    for p0 in grid_p0:
        for q in grid_q:
            fails = [p_failure(solve_pc(p0, att, q), att) for att in grid_att]
            assert all(b <= a + 1e-12 for a, b in zip(fails, fails[1:]))


def test_solve_pc_classes_reduces_to_homogeneous():
    for q, p0, att in [(2, 0.99, 1), (5, 0.95, 2), (9, 0.99, 4)]:
        hetero = solve_pc_classes([(q, p0, att)])[0]
        assert abs(hetero - solve_pc(p0, att, q)) < 1e-10


def test_solve_pc_classes_unbounded_competitor():
    # one unbounded-chain transmitter sends with rate 1-p0 regardless of pc
    (pc_u, pc_e) = solve_pc_classes([(1, 0.99, 4), (1, 0.5, None)])
    assert pc_u == pytest.approx(0.5, abs=1e-12)  # blocked by the 0.5 sender
    assert pc_e == pytest.approx(0.01 * (1 - 0.5 ** 4), rel=1e-9)


# ----------------------------------------------------------- priority chain

def test_priority_chain_first_three_match_closed_forms():
    chain = priority_chain(0.99, 3)
    assert chain[0] == 0.0
    assert chain[1] == pytest.approx(1 - 0.99, abs=1e-15)
    # third rank: 1 - p0*(1 - (1-p0)*p0)
    assert chain[2] == pytest.approx(1 - 0.99 * (1 - 0.01 * 0.99), abs=1e-15)
    assert chain[2] == pytest.approx(0.019801, abs=5e-7)


def test_priority_chain_trivia():
    assert priority_chain(0.5, 1) == [0.0]
    assert priority_chain(1.0, 6) == [0.0] * 6


def test_priority_chain_rank_prefix_stability():
    # a rank's blocking does not depend on how many lower ranks exist
    assert priority_chain(0.95, 9)[:4] == priority_chain(0.95, 4)


@given(p0=st.floats(0.0, 1.0), q=st.integers(1, 32))
@settings(max_examples=200, deadline=None)
def test_priority_chain_monotone_and_bounded(p0, q):
    chain = priority_chain(p0, q)
    assert all(b >= a - 1e-15 for a, b in zip(chain, chain[1:]))
    for i, pc in enumerate(chain):
        assert 0.0 <= pc <= 1.0 + 1e-15
        bound = 1 - p0 ** i  # all higher ranks saturated
        assert pc <= bound + 1e-12


def test_priority_chain_mixed_heterogeneous_rates():
    chain = priority_chain_mixed([0.99, 0.5, 0.99])
    assert chain[0] == 0.0
    assert chain[1] == pytest.approx(0.01, abs=1e-15)
    assert chain[2] == pytest.approx(1 - 0.99 * (1 - 0.5 * 0.99), abs=1e-14)


# ------------------------------------------------------------ alignment mean

def test_alignment_means():
    assert alignment_time_mean(SchemeKind.CONVENTIONAL, 1000) == 500.0
    assert alignment_time_mean(SchemeKind.MULTI_CONFIG, 1000, 4) == 125.0
    assert alignment_time_mean(SchemeKind.MULTI_CONFIG, 1000, 1) == 500.0
    with pytest.raises(ValueError):
        alignment_time_mean(SchemeKind.CONVENTIONAL, 1000, 2)


# ------------------------------------------------------------- analyze_spec

def test_analyze_symmetric_conventional():
    res = analyze_spec(conv_spec(q=2, p0=0.99))
    assert res.p_c == pytest.approx(0.01 / 1.01, abs=1e-10)
    assert res.p_failure == pytest.approx(0.01 / 1.01, abs=1e-10)
    assert res.per_ue_attempts == (1, 1)


def test_analyze_priority_orders_by_rank():
    res = analyze_spec(priority_spec(q=3))
    assert res.p_c is None
    assert res.per_ue_pc[0] == 0.0
    assert res.per_ue_pc[1] == pytest.approx(0.01, abs=1e-12)
    assert res.per_ue_failure == res.per_ue_pc  # single attempt each


def test_analyze_multi_config_attempts():
    res = analyze_spec(multi_spec(q=2, n=2))
    assert res.per_ue_attempts == (2, 2)
    assert res.p_failure == pytest.approx(1e-4, rel=0.05)


def test_analyze_idle_reduction_uses_timing_cap():
    res = analyze_spec(idle_reduction_spec(q=2))
    assert res.per_ue_attempts == (2, 2)


def test_analyze_heterogeneous_classes():
    from fbesim import ScenarioSpec, TransmitterSpec
    txs = (TransmitterSpec(ue_id=0, p0=0.99, k_max=0, n_configs=4),
           TransmitterSpec(ue_id=1, p0=0.99, k_max=0, n_configs=4),
           TransmitterSpec(ue_id=2, p0=0.5, k_max=None))
    spec = ScenarioSpec(scheme=SchemeKind.MULTI_CONFIG, transmitters=txs,
                        base_period=1000, cot=900)
    res = analyze_spec(spec)
    assert res.p_c is None
    assert res.per_ue_pc[0] == res.per_ue_pc[1] != res.per_ue_pc[2]
    assert res.per_ue_failure[2] == 0.0  # unbounded chain never drops
    oracle = solve_pc_classes([(2, 0.99, 4), (1, 0.5, None)])
    assert res.per_ue_pc[0] == pytest.approx(oracle[0], abs=1e-12)

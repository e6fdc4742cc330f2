import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbesim import (CCA_US, FfpConfig, SchemeKind, TransmitterSpec,
                    allowed_attempts, cca_windows, errors, next_cca_after,
                    uniform_transmitters, validate_scenario)
from fbesim.core import ScenarioSpec

from conftest import conv_spec, idle_reduction_spec, multi_spec, priority_spec


# ---------------------------------------------------------------- FfpConfig

def test_ffp_config_accepts_reference_timings():
    FfpConfig(period=1000, cot=900, idle=100, offset=0)
    FfpConfig(period=1000, cot=650, idle=350, offset=40)
    FfpConfig(period=10000, cot=9500, idle=500, offset=9999)


def test_ffp_config_rejects_cot_above_95_percent():
    with pytest.raises(errors.CotTooLarge):
        FfpConfig(period=1000, cot=951, idle=49, offset=0)


def test_ffp_config_rejects_short_idle():
    # 5% of 1000 is 50, but the 100 us floor binds (the 5% branch alone is
    # unreachable: idle below 5% already implies cot above 95%)
    with pytest.raises(errors.IdleTooShort):
        FfpConfig(period=1000, cot=901, idle=99, offset=0)


def test_ffp_config_rejects_inconsistent_split():
    with pytest.raises(errors.ScenarioValidationError):
        FfpConfig(period=1000, cot=800, idle=100, offset=0)


def test_ffp_config_rejects_offset_outside_period():
    with pytest.raises(errors.ScenarioValidationError):
        FfpConfig(period=1000, cot=900, idle=100, offset=1000)


# -------------------------------------------------------------- cca_windows

def test_cca_windows_basic_grid():
    cfg = FfpConfig(period=1000, cot=900, idle=100, offset=0)
    assert cca_windows(cfg, start=0, count=2) == [(975, 1000), (1975, 2000)]


def test_cca_windows_offset_grid_starts_at_offset():
    # no frames exist before the offset, so the first window is (1475, 1500)
    cfg = FfpConfig(period=1000, cot=900, idle=100, offset=500)
    assert cca_windows(cfg, start=0, count=1) == [(1475, 1500)]


def test_cca_windows_boundary_inclusion():
    cfg = FfpConfig(period=1000, cot=900, idle=100, offset=0)
    assert cca_windows(cfg, start=975, count=1) == [(975, 1000)]
    assert cca_windows(cfg, start=976, count=1) == [(1975, 2000)]


def test_cca_windows_rejects_zero_count():
    cfg = FfpConfig(period=1000, cot=900, idle=100, offset=0)
    with pytest.raises(ValueError):
        cca_windows(cfg, start=0, count=0)


@given(offset=st.integers(0, 999), start=st.integers(0, 50_000),
       count=st.integers(1, 8))
@settings(max_examples=200, deadline=None)
def test_cca_windows_increasing_periodic_and_at_or_after_start(offset, start, count):
    cfg = FfpConfig(period=1000, cot=900, idle=100, offset=offset)
    ws = cca_windows(cfg, start=start, count=count)
    assert len(ws) == count
    for (a0, b0), (a1, b1) in zip(ws, ws[1:]):
        assert a1 - a0 == 1000 and b1 - b0 == 1000
    for a, b in ws:
        assert b - a == CCA_US
        assert a >= start
        assert b % 1000 == offset % 1000
        assert b >= offset + 1000
    # minimality: the window one period earlier is before `start` or pre-grid
    a0, b0 = ws[0]
    assert a0 - 1000 < start or b0 - 1000 < offset + 1000


# ------------------------------------------------------------ next_cca_after

def test_next_cca_after_picks_earliest_grid():
    cfgs = [FfpConfig(1000, 900, 100, 0), FfpConfig(1000, 900, 100, 500)]
    assert next_cca_after(cfgs, 0) == (0, (975, 1000))


def test_next_cca_after_single_config():
    cfgs = [FfpConfig(1000, 900, 100, 250)]
    idx, win = next_cca_after(cfgs, 12_345)
    assert idx == 0
    assert win[0] >= 12_345


def test_next_cca_after_boundary_start():
    cfgs = [FfpConfig(1000, 900, 100, 0)]
    assert next_cca_after(cfgs, 975) == (0, (975, 1000))


def test_next_cca_after_tie_breaks_low_index():
    cfgs = [FfpConfig(1000, 900, 100, 300), FfpConfig(1000, 900, 100, 300)]
    assert next_cca_after(cfgs, 0)[0] == 0


# --------------------------------------------------------- transmitter spec

def test_transmitter_rejects_bad_probability():
    with pytest.raises(errors.ScenarioValidationError):
        TransmitterSpec(ue_id=0, p0=1.5)


def test_transmitter_rejects_m_above_n():
    with pytest.raises(errors.ScenarioValidationError):
        TransmitterSpec(ue_id=0, p0=0.5, n_configs=2, m_budget=3)


def test_allowed_attempts_per_scheme():
    conv = TransmitterSpec(ue_id=0, p0=0.99, k_max=0)
    assert allowed_attempts(conv, SchemeKind.CONVENTIONAL, 1000, 900) == 1
    multi = TransmitterSpec(ue_id=0, p0=0.99, k_max=0, n_configs=4)
    assert allowed_attempts(multi, SchemeKind.MULTI_CONFIG, 1000, 900) == 4
    capped = TransmitterSpec(ue_id=0, p0=0.99, k_max=0, n_configs=4, m_budget=2)
    assert allowed_attempts(capped, SchemeKind.MULTI_CONFIG, 1000, 900) == 2
    unbounded = TransmitterSpec(ue_id=0, p0=0.5, k_max=None)
    assert allowed_attempts(unbounded, SchemeKind.CONVENTIONAL, 1000, 900) is None
    # idle-reduction: cap follows from the budget and occupancy, not a constant
    baseline = TransmitterSpec(ue_id=0, p0=0.99, k_max=None, latency_budget=1000)
    assert allowed_attempts(baseline, SchemeKind.IDLE_REDUCTION, 1000, 900) == 2
    assert allowed_attempts(baseline, SchemeKind.IDLE_REDUCTION, 1000, 450) == 3
    # a budgeted single-grid transmitter gets one attempt per ms-grid budget
    urllc = TransmitterSpec(ue_id=0, p0=0.99, k_max=5, latency_budget=1000)
    assert allowed_attempts(urllc, SchemeKind.CONVENTIONAL, 1000, 900) == 1


# ---------------------------------------------------------- validate_scenario

def test_priority_nine_ranked_at_40us_step_valid():
    # idle 350 > (9-1)*40 + 25 = 345
    spec = priority_spec(q=9)
    sc = validate_scenario(spec)
    offsets = [cfgs[0].offset for cfgs in sc.ue_configs]
    assert offsets == [40 * r for r in range(9)]


def test_priority_ten_ranked_at_40us_step_infeasible():
    # (10-1)*40 + 25 = 385 > 350
    with pytest.raises(errors.InfeasibleIdlePeriod):
        validate_scenario(priority_spec(q=10))


def test_single_conventional_offset_zero():
    sc = validate_scenario(conv_spec(q=1))
    assert [cfgs[0].offset for cfgs in sc.ue_configs] == [0]
    assert sc.attempts == (1,)


def test_multi_config_nondivisible_period():
    with pytest.raises(errors.NonDivisiblePeriod):
        validate_scenario(multi_spec(n=3))


def test_period_outside_allowed_set_rejected():
    with pytest.raises(errors.PeriodNotAllowed):
        validate_scenario(conv_spec(period=3000, cot=2700))


def test_duplicate_priority_rejected():
    txs = (TransmitterSpec(ue_id=0, p0=0.99, priority_rank=1),
           TransmitterSpec(ue_id=1, p0=0.99, priority_rank=1))
    spec = ScenarioSpec(scheme=SchemeKind.PRIORITY_ARRANGED, transmitters=txs,
                        base_period=1000, cot=650, priority_offset_step=40)
    with pytest.raises(errors.DuplicatePriority):
        validate_scenario(spec)


def test_priority_step_below_window_size_rejected():
    with pytest.raises(errors.CcaWindowOverlap):
        validate_scenario(priority_spec(q=3, step=20))


def test_priority_span_beyond_cot_rejected():
    spec = ScenarioSpec(
        scheme=SchemeKind.PRIORITY_ARRANGED,
        transmitters=uniform_transmitters(4, 0.99, k_max=0),
        base_period=1000, cot=200, priority_offset_step=100)
    with pytest.raises(errors.PrioritySpanExceedsCot):
        validate_scenario(spec)


def test_conventional_too_many_transmitters_overlap():
    # 41 transmitters cannot fit 41 disjoint 25 us windows in 1000 us
    with pytest.raises(errors.CcaWindowOverlap):
        validate_scenario(conv_spec(q=41))


def test_multi_config_requires_single_grid_scheme_consistency():
    spec = ScenarioSpec(
        scheme=SchemeKind.CONVENTIONAL,
        transmitters=uniform_transmitters(2, 0.99, k_max=0, n_configs=2),
        base_period=1000, cot=900)
    with pytest.raises(errors.ScenarioValidationError):
        validate_scenario(spec)


def _window_positions(sc):
    """All window arcs [start, end) modulo the period, one full hyperperiod."""
    T = sc.base_period
    arcs = []
    for phases in sc.window_phases:
        for p in phases:
            arcs.append(((p - CCA_US) % T, p % T if p % T else T))
    return arcs


@pytest.mark.parametrize("spec_fn,kw", [
    (conv_spec, dict(q=7)),
    (multi_spec, dict(q=5, n=4)),
    (multi_spec, dict(q=10, n=4)),
    (priority_spec, dict(q=9)),
    (idle_reduction_spec, dict(q=6)),
])
def test_all_cca_windows_disjoint_over_hyperperiod(spec_fn, kw):
    sc = validate_scenario(spec_fn(**kw))
    T = sc.base_period
    covered = [False] * T
    for phases in sc.window_phases:
        for p in phases:
            for k in range(CCA_US):
                slot = (p - 1 - k) % T
                assert not covered[slot], "window overlap on the period circle"
                covered[slot] = True


def test_priority_rank1_windows_never_overlap_foreign_cot():
    """Rank 1's sensing slot avoids every other occupancy span by construction."""
    sc = validate_scenario(priority_spec(q=9))
    T, C = sc.base_period, sc.cot
    top = sc.window_phases[0][0]  # ue 0 holds rank 1
    win = range((top - CCA_US) % T, (top - CCA_US) % T + CCA_US)
    for ue in range(1, 9):
        o = sc.ue_configs[ue][0].offset
        cot_slots = {(o + k) % T for k in range(C)}
        assert not any(s % T in cot_slots for s in win)


def test_priority_lower_rank_windows_inside_higher_cot_span():
    sc = validate_scenario(priority_spec(q=9))
    T, C = sc.base_period, sc.cot
    for hi in range(9):
        o_hi = sc.ue_configs[hi][0].offset
        cot_slots = {(o_hi + k) % T for k in range(C)}
        for lo in range(hi + 1, 9):
            p = sc.window_phases[lo][0]
            win = {(p - 1 - k) % T for k in range(CCA_US)}
            assert win <= cot_slots


def test_priority_higher_rank_windows_inside_lower_idle():
    """Every pair: the higher rank senses inside the lower rank's idle tail."""
    sc = validate_scenario(priority_spec(q=9))
    T, C = sc.base_period, sc.cot
    for lo in range(9):
        o_lo = sc.ue_configs[lo][0].offset
        idle_slots = {(o_lo + C + k) % T for k in range(T - C)}
        for hi in range(lo):
            p = sc.window_phases[hi][0]
            win = {(p - 1 - k) % T for k in range(CCA_US)}
            assert win <= idle_slots


def test_eq20_gate_matches_closed_formula_exhaustively():
    """Acceptance grid: Q in [1, 64] x every step in [25, 200], idle 350 us.

    Whenever the idle constraint idle > max((Q-1)*step + 25, 100) passes, the
    staggered span (Q-1)*step stays below 325 < cot, so the gate is exactly
    the closed formula on this grid.
    """
    for q in range(1, 65):
        for step in range(25, 201):
            ok = True
            try:
                validate_scenario(priority_spec(q=q, step=step))
            except errors.ScenarioValidationError:
                ok = False
            expected = 350 > max((q - 1) * step + CCA_US, 100)
            assert ok == expected, (q, step)


def test_validated_fingerprint_excludes_seed():
    a = validate_scenario(conv_spec(seed=1))
    b = validate_scenario(conv_spec(seed=2))
    assert a.fingerprint() == b.fingerprint()
    c = validate_scenario(conv_spec(q=3, seed=1))
    assert a.fingerprint() != c.fingerprint()

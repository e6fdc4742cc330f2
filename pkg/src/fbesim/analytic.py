"""Closed-form blocking analysis of frame-based channel access.

The retry process of one packet is a Markov chain: with probability 1 - p0 a
frame carries a packet, each sensing attempt is blocked independently with
probability p_c, and a packet is dropped after its attempt budget is
exhausted.  Coupling Q transmitters through their per-frame transmission
probability yields a one-dimensional fixed point for p_c; the priority
arrangement replaces the fixed point by a forward recursion over ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import errors
from .core import SchemeKind, ValidatedScenario, ScenarioSpec, allowed_attempts

_BISECT_ITERS = 100
_RESIDUAL_TOL = 1e-12


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class StationaryDistribution:
    """Per-packet state weights of the retry chain, normalized to the start state.

    pi_states[i] is the weight of the i-th sensing frame; pi_success is the
    probability the packet obtains the channel, and pi_failure absorbs both
    the no-packet branch and the exhausted-retries drop, so that
    pi_success + pi_failure == pi_start == 1.
    """

    pi_start: float
    pi_success: float
    pi_failure: float
    pi_states: tuple[float, ...]


def stationary_distribution(p0: float, p_c: float, k: int) -> StationaryDistribution:
    """Chain weights for no-packet probability p0, blocking p_c, last retry index k."""
    _check_prob("p0", p0)
    _check_prob("p_c", p_c)
    if k < 0:
        raise ValueError("k must be >= 0")
    pi0 = 1.0 - p0
    states = tuple(pi0 * p_c ** i for i in range(k + 1))
    success = pi0 * (1.0 - p_c ** (k + 1))
    return StationaryDistribution(
        pi_start=1.0,
        pi_success=success,
        pi_failure=1.0 - success,
        pi_states=states,
    )


def p_failure(p_c: float, attempts: int) -> float:
    """Probability a packet is dropped after `attempts` blocked sensings."""
    _check_prob("p_c", p_c)
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    return p_c ** attempts


def p_trans(p0: float, p_c: float, attempts: int) -> float:
    """Per-frame probability that a transmitter acquires the channel."""
    _check_prob("p0", p0)
    return (1.0 - p0) * (1.0 - p_failure(p_c, attempts))


def _coupling_residual(x: float, p0: float, attempts: int, q: int) -> float:
    """g(x) = x - [1 - (1 - (1-p0)(1-x^attempts))^(q-1)]; root is the blocking prob."""
    tau = (1.0 - p0) * (1.0 - x ** attempts)
    return x - (1.0 - (1.0 - tau) ** (q - 1))


def solve_pc(p0: float, attempts: int, q: int) -> float:
    """Blocking probability of Q symmetric transmitters with a given attempt budget.

    Solves x = 1 - (1 - (1-p0)(1-x^attempts))^(q-1) by bisection; g is
    monotone non-decreasing with g(0) <= 0 <= g(1), so the root is bracketed.
    """
    _check_prob("p0", p0)
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    if q < 1:
        raise ValueError("q must be >= 1")
    if q == 1 or p0 == 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    if _coupling_residual(lo, p0, attempts, q) > 0 or _coupling_residual(hi, p0, attempts, q) < 0:
        raise errors.NoConvergence(
            f"no sign change for p0={p0}, attempts={attempts}, q={q}")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if _coupling_residual(mid, p0, attempts, q) >= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def solve_pc_classes(classes: Sequence[tuple[int, float, int | None]],
                     ) -> tuple[float, ...]:
    """Per-class blocking probabilities for a mix of transmitter populations.

    `classes` holds (count, p0, attempts) with attempts None for an unbounded
    retry chain.  Each class member is blocked when any other transmitter
    sends in the frame overlapping its sensing slot:
    pc_i = 1 - prod_j (1 - tau_j)^(count_j - [j == i]) with
    tau_j = (1-p0_j)(1 - pc_j^attempts_j).  Solved by damped fixed-point
    iteration (the map is monotone and a contraction on [0,1]^k here).
    """
    if not classes:
        raise ValueError("classes must be nonempty")
    for cnt, p0, att in classes:
        if cnt < 1:
            raise ValueError("class count must be >= 1")
        _check_prob("p0", p0)
        if att is not None and att < 1:
            raise ValueError("attempts must be >= 1 or None")

    def taus(pcs: list[float]) -> list[float]:
        out = []
        for (cnt, p0, att), pc in zip(classes, pcs):
            miss = 0.0 if att is None else pc ** att
            out.append((1.0 - p0) * (1.0 - miss))
        return out

    def apply(pcs: list[float]) -> list[float]:
        t = taus(pcs)
        new = []
        for i, (cnt_i, _, _) in enumerate(classes):
            prod = 1.0
            for j, (cnt_j, _, _) in enumerate(classes):
                k = cnt_j - 1 if j == i else cnt_j
                if k:
                    prod *= (1.0 - t[j]) ** k
            new.append(1.0 - prod)
        return new

    pcs = [0.0] * len(classes)
    for _ in range(200_000):
        new = apply(pcs)
        delta = max(abs(a - b) for a, b in zip(new, pcs))
        pcs = [0.5 * (a + b) for a, b in zip(new, pcs)]
        if delta < 1e-15:
            break
    residual = max(abs(a - b) for a, b in zip(apply(pcs), pcs))
    if residual > _RESIDUAL_TOL:
        raise errors.NoConvergence(
            f"class fixed point residual {residual:g} for {classes}")
    return tuple(pcs)


def priority_chain_mixed(p0s: Sequence[float],
                         attempts: Sequence[int] | None = None) -> list[float]:
    """Blocking probability per rank when grids are arranged by priority.

    Rank i is blocked only by higher ranks: pc_i = 1 - prod_{j<i} (1 - tau_j)
    with tau_j the per-frame transmission probability of rank j.
    """
    if attempts is None:
        attempts = [1] * len(p0s)
    if len(attempts) != len(p0s):
        raise ValueError("attempts and p0s must have equal length")
    out: list[float] = []
    prod = 1.0
    for p0, att in zip(p0s, attempts):
        _check_prob("p0", p0)
        pc = 1.0 - prod
        out.append(pc)
        prod *= 1.0 - (1.0 - p0) * (1.0 - pc ** att)
    return out


def priority_chain(p0: float, q: int) -> list[float]:
    """Rank-ordered blocking probabilities for Q equal-rate transmitters."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return priority_chain_mixed([p0] * q)


def alignment_time_mean(scheme: SchemeKind, period: int, n_configs: int = 1) -> float:
    """Mean wait from a uniform arrival to the first sensing opportunity.

    Sensing instants are period/n_configs apart across staggered grids, one
    period apart otherwise, so the mean alignment is half the spacing.
    """
    if period <= 0:
        raise ValueError("period must be positive")
    if n_configs < 1:
        raise ValueError("n_configs must be >= 1")
    if scheme is not SchemeKind.MULTI_CONFIG:
        if n_configs != 1:
            raise ValueError(f"{scheme.value} uses a single configuration")
        return period / 2.0
    return period / (2.0 * n_configs)


@dataclass(frozen=True)
class AnalyticResult:
    """Solved blocking probabilities for one scenario.

    The scalar fields hold the common value when every transmitter sees the
    same blocking probability (symmetric schemes with identical
    transmitters); they are None in heterogeneous or priority systems, where
    the per-UE tuples carry the answer.
    """

    p_c: float | None
    p_trans: float | None
    p_failure: float | None
    per_ue_pc: tuple[float, ...]
    per_ue_failure: tuple[float, ...]
    per_ue_attempts: tuple[int | None, ...]

    @property
    def q(self) -> int:
        return len(self.per_ue_pc)


def _per_packet_failure(pc: float, attempts: int | None) -> float:
    return 0.0 if attempts is None else p_failure(pc, attempts)


def analyze_spec(spec: ScenarioSpec) -> AnalyticResult:
    """Predict blocking, transmission and drop probabilities for a scenario.

    Works on the raw spec (materialized offsets do not enter the math), so
    predictions exist even for scenarios whose timing cannot be realized.
    """
    q = len(spec.transmitters)
    atts = tuple(allowed_attempts(t, spec.scheme, spec.base_period, spec.cot)
                 for t in spec.transmitters)
    if spec.scheme is SchemeKind.PRIORITY_ARRANGED:
        ranks = [t.priority_rank for t in spec.transmitters]
        order = (list(range(q)) if all(r is None for r in ranks)
                 else sorted(range(q), key=lambda i: ranks[i]))
        chain = priority_chain_mixed(
            [spec.transmitters[i].p0 for i in order],
            [1 if atts[i] is None else atts[i] for i in order])
        pcs = [0.0] * q
        for pos, i in enumerate(order):
            pcs[i] = chain[pos]
        per_fail = tuple(_per_packet_failure(pcs[i], atts[i]) for i in range(q))
        return AnalyticResult(None, None, None, tuple(pcs), per_fail, atts)

    keys = [(t.p0, atts[i]) for i, t in enumerate(spec.transmitters)]
    uniq: list[tuple[float, int | None]] = []
    for key in keys:
        if key not in uniq:
            uniq.append(key)
    if len(uniq) == 1:
        p0, att = uniq[0]
        if att is None:
            # unbounded chains never drop; their coupling uses tau = 1 - p0
            pc = solve_pc_classes([(q, p0, None)])[0]
            ptr = 1.0 - p0
        else:
            pc = solve_pc(p0, att, q)
            ptr = p_trans(p0, pc, att)
        fail = _per_packet_failure(pc, att)
        return AnalyticResult(pc, ptr, fail, (pc,) * q, (fail,) * q, atts)

    classes = [(keys.count(key), key[0], key[1]) for key in uniq]
    pcs_by_class = solve_pc_classes(classes)
    class_of = {key: idx for idx, key in enumerate(uniq)}
    pcs = tuple(pcs_by_class[class_of[key]] for key in keys)
    per_fail = tuple(_per_packet_failure(pc, att) for pc, att in zip(pcs, atts))
    return AnalyticResult(None, None, None, pcs, per_fail, atts)


def analyze(scenario: ValidatedScenario | ScenarioSpec) -> AnalyticResult:
    if isinstance(scenario, ValidatedScenario):
        spec = ScenarioSpec(
            scheme=scenario.scheme,
            transmitters=scenario.transmitters,
            base_period=scenario.base_period,
            cot=scenario.cot,
            priority_offset_step=scenario.priority_offset_step,
            horizon_frames=scenario.horizon_frames,
            seed=scenario.seed,
        )
        return analyze_spec(spec)
    return analyze_spec(scenario)


def coupling_residual(pc: float, p0: float, attempts: int, q: int) -> float:
    """Self-consistency residual |g(pc)| of a solved blocking probability."""
    return abs(_coupling_residual(pc, p0, attempts, q))


def binomial_radius(p: float, n: int, z: float = 3.0) -> float:
    """Half-width of the z-sigma binomial interval around probability p."""
    if n <= 0:
        return math.inf
    return z * math.sqrt(max(p * (1.0 - p), 0.0) / n)

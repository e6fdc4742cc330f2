"""Timing grid, frame geometry and scenario validation.

All timing quantities are exact integer microseconds.  A transmitter's frame
grid is [offset + k*period, offset + (k+1)*period) for k >= 0; there are no
frames before the offset.  Each frame ends with an idle period whose last
CCA_US microseconds form the clear-channel-assessment observation window, so a
successful assessment is immediately followed by the next frame's occupancy.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from enum import Enum

from . import errors

TimeMicros = int

CCA_US: TimeMicros = 25
MIN_IDLE_US: TimeMicros = 100
ALLOWED_PERIODS_US: tuple[TimeMicros, ...] = (1000, 2000, 2500, 4000, 5000, 10000)
# channel-access budget of a latency-critical packet
URLLC_BUDGET_US: TimeMicros = 1000


class SchemeKind(Enum):
    CONVENTIONAL = "conventional"
    MULTI_CONFIG = "multi_config"
    PRIORITY_ARRANGED = "priority_arranged"
    IDLE_REDUCTION = "idle_reduction"


# schemes in which every transmitter runs a single frame grid
_SINGLE_CONFIG_SCHEMES = (
    SchemeKind.CONVENTIONAL,
    SchemeKind.PRIORITY_ARRANGED,
    SchemeKind.IDLE_REDUCTION,
)


@dataclass(frozen=True)
class FfpConfig:
    """One fixed-frame-period grid: period = cot + idle, shifted by offset."""

    period: TimeMicros
    cot: TimeMicros
    idle: TimeMicros
    offset: TimeMicros = 0

    def __post_init__(self):
        if self.period <= 0 or self.cot <= 0 or self.idle < 0:
            raise errors.ScenarioValidationError(
                f"non-positive duration in {self!r}")
        if self.cot + self.idle != self.period:
            raise errors.ScenarioValidationError(
                f"cot + idle must equal period: {self.cot} + {self.idle} != {self.period}")
        if 20 * self.cot > 19 * self.period:
            raise errors.CotTooLarge(
                f"cot {self.cot} us exceeds 95% of period {self.period} us")
        min_idle = max(-(-self.period * 5 // 100), MIN_IDLE_US)
        if self.idle < min_idle:
            raise errors.IdleTooShort(
                f"idle {self.idle} us below required {min_idle} us "
                f"(max of 5% of period and {MIN_IDLE_US} us)")
        if not 0 <= self.offset < self.period:
            raise errors.ScenarioValidationError(
                f"offset {self.offset} must lie in [0, period)")


def cca_windows(config: FfpConfig, start: TimeMicros = 0, count: int = 1,
                ) -> list[tuple[TimeMicros, TimeMicros]]:
    """Next `count` CCA windows of `config` whose start is at or after `start`.

    Window k occupies the last CCA_US microseconds of frame k, i.e.
    [end - CCA_US, end) with end = offset + (k+1)*period.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    # smallest k >= 0 with offset + (k+1)*period - CCA_US >= start
    k = max(0, -(-(start + CCA_US - config.offset) // config.period) - 1)
    out = []
    for i in range(k, k + count):
        end = config.offset + (i + 1) * config.period
        out.append((end - CCA_US, end))
    return out


def next_cca_after(configs: list[FfpConfig] | tuple[FfpConfig, ...], t: TimeMicros,
                   ) -> tuple[int, tuple[TimeMicros, TimeMicros]]:
    """Configuration whose next CCA window starts earliest at or after `t`.

    Ties break toward the lowest configuration index.
    """
    if not configs:
        raise ValueError("configs must be nonempty")
    best_i = -1
    best_w = (0, 0)
    for i, cfg in enumerate(configs):
        w = cca_windows(cfg, start=t, count=1)[0]
        if best_i < 0 or w[0] < best_w[0]:
            best_i, best_w = i, w
    return best_i, best_w


@dataclass(frozen=True)
class TransmitterSpec:
    """One transmitter: traffic intensity, retry chain and scheme parameters.

    p0 is the probability of having no packet in a given frame period.  k_max
    is the index of the last allowed sensing frame per configuration (None
    models an unbounded retry chain); n_configs and m_budget parameterize the
    multi-configuration scheme, where m_budget is the number of sensing
    opportunities that fit the latency budget (defaults to n_configs).
    """

    ue_id: int
    p0: float
    k_max: int | None = 0
    n_configs: int = 1
    m_budget: int | None = None
    priority_rank: int | None = None
    latency_budget: TimeMicros | None = None

    def __post_init__(self):
        if not 0.0 <= self.p0 <= 1.0:
            raise errors.ScenarioValidationError(f"p0 {self.p0} outside [0, 1]")
        if self.k_max is not None and self.k_max < 0:
            raise errors.ScenarioValidationError("k_max must be >= 0 or None")
        if self.n_configs < 1:
            raise errors.ScenarioValidationError("n_configs must be >= 1")
        if self.m_budget is not None and not 1 <= self.m_budget <= self.n_configs:
            raise errors.ScenarioValidationError(
                f"m_budget {self.m_budget} must lie in [1, n_configs={self.n_configs}]")
        if self.priority_rank is not None and self.priority_rank < 1:
            raise errors.ScenarioValidationError("priority_rank must be >= 1")
        if self.latency_budget is not None and self.latency_budget < 1:
            raise errors.ScenarioValidationError("latency_budget must be positive")

    @property
    def m_effective(self) -> int:
        return self.m_budget if self.m_budget is not None else self.n_configs


def allowed_attempts(tx: TransmitterSpec, scheme: SchemeKind,
                     period: TimeMicros, cot: TimeMicros) -> int | None:
    """Per-packet CCA attempt cap for `tx` under `scheme`; None is unlimited.

    The cap is the minimum of the retry-chain length, the budgeted
    configuration count and the number of sensing instants that fit the
    latency budget.  Sensing instants sit at 25 us plus multiples of the
    retry spacing (one period for a single grid, period/n across staggered
    grids, one occupancy time when the idle wait is skipped), with alignment
    ignored.
    """
    caps: list[int] = []
    chain = None if tx.k_max is None else tx.k_max + 1
    if scheme is SchemeKind.MULTI_CONFIG:
        if chain is not None:
            caps.append(tx.n_configs * chain)
        if tx.m_budget is not None:
            caps.append(tx.m_budget)
        if tx.latency_budget is not None:
            spacing = period // tx.n_configs
            caps.append(1 + (tx.latency_budget - CCA_US) // spacing)
    elif scheme is SchemeKind.IDLE_REDUCTION:
        budget = tx.latency_budget if tx.latency_budget is not None else URLLC_BUDGET_US
        caps.append(1 + (budget - CCA_US) // cot)
        if chain is not None:
            caps.append(chain)
    else:
        if chain is not None:
            caps.append(chain)
        if tx.latency_budget is not None:
            caps.append(1 + (tx.latency_budget - CCA_US) // period)
    if not caps:
        return None
    return max(1, min(caps))


@dataclass(frozen=True)
class ScenarioSpec:
    """A Q-transmitter system sharing one channel under a single scheme."""

    scheme: SchemeKind
    transmitters: tuple[TransmitterSpec, ...]
    base_period: TimeMicros = 1000
    cot: TimeMicros = 900
    priority_offset_step: TimeMicros | None = None
    horizon_frames: int = 1_000_000
    seed: int = 2024

    def __post_init__(self):
        if len(self.transmitters) < 1:
            raise errors.ScenarioValidationError("need at least one transmitter")
        if self.horizon_frames < 1:
            raise errors.ScenarioValidationError("horizon_frames must be >= 1")
        ids = [t.ue_id for t in self.transmitters]
        if ids != list(range(len(ids))):
            raise errors.ScenarioValidationError(
                "transmitter ue_ids must be 0..Q-1 in order")


def uniform_transmitters(q: int, p0: float, **kwargs) -> tuple[TransmitterSpec, ...]:
    """Q identical transmitters with consecutive ids (ranks follow order)."""
    return tuple(TransmitterSpec(ue_id=i, p0=p0, **kwargs) for i in range(q))


@dataclass(frozen=True)
class ValidatedScenario:
    """A scenario with concrete per-transmitter grids and attempt caps.

    window_phases lists every potential CCA window end position modulo the
    period per transmitter, including the off-grid retry slots of the
    idle-reduction scheme; validation guarantees the corresponding 25 us
    windows are pairwise disjoint on the period circle.
    """

    scheme: SchemeKind
    transmitters: tuple[TransmitterSpec, ...]
    base_period: TimeMicros
    cot: TimeMicros
    idle: TimeMicros
    priority_offset_step: TimeMicros | None
    horizon_frames: int
    seed: int
    ue_configs: tuple[tuple[FfpConfig, ...], ...]
    attempts: tuple[int | None, ...]
    window_phases: tuple[tuple[int, ...], ...]

    @property
    def q(self) -> int:
        return len(self.transmitters)

    def fingerprint(self, horizon_frames: int | None = None) -> str:
        """Content hash of everything that defines the system except the seed."""
        h = horizon_frames if horizon_frames is not None else self.horizon_frames
        parts = [
            self.scheme.value, self.base_period, self.cot, self.idle,
            self.priority_offset_step, h,
            tuple((t.p0, t.k_max, t.n_configs, t.m_budget, t.priority_rank,
                   t.latency_budget) for t in self.transmitters),
            tuple(tuple((c.offset) for c in cfgs) for cfgs in self.ue_configs),
            self.attempts,
        ]
        return hashlib.sha256(repr(parts).encode()).hexdigest()


def _round_div(num: int, den: int) -> int:
    """Round num/den to the nearest integer, halves up."""
    return (2 * num + den) // (2 * den)


def _window_arcs(phase: int, period: int) -> list[tuple[int, int]]:
    """The [phase - CCA_US, phase) window as non-wrapping arcs on [0, period)."""
    lo = phase - CCA_US
    if lo >= 0:
        return [(lo, phase if phase > 0 else period)]
    # wraps across zero
    arcs = [(period + lo, period)]
    if phase > 0:
        arcs.append((0, phase))
    return arcs


def _check_window_disjoint(phases_per_ue: list[list[int]], period: int) -> None:
    segments: list[tuple[int, int, int, int]] = []
    for ue, phases in enumerate(phases_per_ue):
        for p in phases:
            for lo, hi in _window_arcs(p % period, period):
                segments.append((lo, hi, ue, p))
    segments.sort()
    for a, b in zip(segments, segments[1:]):
        if a[1] > b[0]:
            raise errors.CcaWindowOverlap(
                f"CCA windows of ue {a[2]} (phase {a[3]}) and ue {b[2]} "
                f"(phase {b[3]}) overlap on the period circle")


def validate_scenario(spec: ScenarioSpec) -> ValidatedScenario:
    """Materialize concrete grid offsets and check every timing constraint.

    Offsets realize the sensing-staggering rule of each scheme: evenly spaced
    grids for the single-configuration schemes, evenly spaced grid groups with
    period/n internal spacing for the multi-configuration scheme, and
    rank-ordered offsets of priority_offset_step for the priority scheme (the
    top rank's window then falls inside every other transmitter's idle period
    while lower ranks sense inside the occupancy span above them).
    """
    period = spec.base_period
    if period not in ALLOWED_PERIODS_US:
        raise errors.PeriodNotAllowed(
            f"period {period} us not in allowed set {ALLOWED_PERIODS_US}")
    idle = period - spec.cot
    # surfaces CotTooLarge / IdleTooShort before any offset work
    FfpConfig(period=period, cot=spec.cot, idle=idle, offset=0)

    q = len(spec.transmitters)
    scheme = spec.scheme
    if scheme in _SINGLE_CONFIG_SCHEMES:
        for t in spec.transmitters:
            if t.n_configs != 1:
                raise errors.ScenarioValidationError(
                    f"{scheme.value} expects one configuration per transmitter, "
                    f"ue {t.ue_id} has {t.n_configs}")

    offsets_per_ue: list[list[int]]
    if scheme is SchemeKind.PRIORITY_ARRANGED:
        step = spec.priority_offset_step
        if step is None:
            raise errors.ScenarioValidationError(
                "priority_offset_step is required for the priority scheme")
        ranks = [t.priority_rank for t in spec.transmitters]
        if all(r is None for r in ranks):
            ranks = list(range(1, q + 1))
        elif any(r is None for r in ranks):
            raise errors.ScenarioValidationError(
                "either all or no transmitters may carry a priority_rank")
        if len(set(ranks)) != q:
            raise errors.DuplicatePriority(f"priority ranks {ranks} not distinct")
        if step < CCA_US:
            raise errors.CcaWindowOverlap(
                f"priority offset step {step} us below the {CCA_US} us window size")
        need = max((q - 1) * step + CCA_US, MIN_IDLE_US)
        if not idle > need:
            raise errors.InfeasibleIdlePeriod(
                f"idle {idle} us must exceed (Q-1)*step + {CCA_US} = "
                f"{(q - 1) * step + CCA_US} us (and {MIN_IDLE_US} us) for Q={q}")
        if (q - 1) * step > spec.cot:
            raise errors.PrioritySpanExceedsCot(
                f"(Q-1)*step = {(q - 1) * step} us exceeds cot {spec.cot} us; "
                "lowest-priority window would leave the top-priority occupancy span")
        # rank position r (0 = highest priority) senses r*step after the top rank
        order = sorted(range(q), key=lambda i: ranks[i])
        offs = [0] * q
        for pos, i in enumerate(order):
            offs[i] = pos * step
        offsets_per_ue = [[o] for o in offs]
    elif scheme is SchemeKind.MULTI_CONFIG:
        for t in spec.transmitters:
            if period % t.n_configs != 0:
                raise errors.NonDivisiblePeriod(
                    f"period {period} us not divisible by n_configs="
                    f"{t.n_configs} of ue {t.ue_id}")
        n_max = max(t.n_configs for t in spec.transmitters)
        offsets_per_ue = []
        for i, t in enumerate(spec.transmitters):
            base = _round_div(i * period, q * n_max)
            spacing = period // t.n_configs
            offsets_per_ue.append(
                [(base + j * spacing) % period for j in range(t.n_configs)])
    else:  # conventional and idle-reduction share the even grid spacing
        offsets_per_ue = [[_round_div(i * period, q)] for i in range(q)]

    attempts = tuple(
        allowed_attempts(t, scheme, period, spec.cot) for t in spec.transmitters)

    phases_per_ue: list[list[int]] = []
    for i, offs in enumerate(offsets_per_ue):
        phases = list(offs)
        if scheme is SchemeKind.IDLE_REDUCTION:
            cap = attempts[i]
            assert cap is not None
            phases += [(offs[0] + k * spec.cot) % period for k in range(1, cap)]
        phases_per_ue.append(phases)
    _check_window_disjoint(phases_per_ue, period)

    ue_configs = tuple(
        tuple(FfpConfig(period=period, cot=spec.cot, idle=idle, offset=o)
              for o in offs)
        for offs in offsets_per_ue)

    return ValidatedScenario(
        scheme=scheme,
        transmitters=spec.transmitters,
        base_period=period,
        cot=spec.cot,
        idle=idle,
        priority_offset_step=spec.priority_offset_step,
        horizon_frames=spec.horizon_frames,
        seed=spec.seed,
        ue_configs=ue_configs,
        attempts=attempts,
        window_phases=tuple(tuple(p) for p in phases_per_ue),
    )


def with_horizon(scenario: ValidatedScenario, horizon_frames: int) -> ValidatedScenario:
    return replace(scenario, horizon_frames=horizon_frames)

"""Deterministic discrete-event simulation of shared-channel frame-based access.

Per base period each transmitter draws a packet with probability 1 - p0 at an
instant uniform in the period.  A packet senses at successive CCA windows
according to its scheme; a window is busy when any other transmitter's
recorded occupancy overlaps it by at least one microsecond.  A success records
a full occupancy interval and releases the packet; exhausting the attempt
budget drops it.  A new arrival while a packet is in flight is suppressed and
counted separately, and a transmitter performs no CCA during its own active
occupancy (such windows are skipped; the alignment statistic still measures
the wait to the closest grid occasion, which is what uniform arrivals make
equal to half the sensing spacing on average).

Results are bit-identical for identical (scenario, seed): the compiled engine
and the pure-Python reference implement the same event order and consume the
same per-transmitter draw streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import engine
from .core import CCA_US, SchemeKind, TimeMicros, ValidatedScenario
from .errors import MixedScenario, SimulationIntegrityError

CI_Z = 3.0  # 99.7% binomial interval

_INF = int(engine.INF)


def wilson_ci(successes: int, trials: int, z: float = CI_Z) -> tuple[float, float]:
    """Wilson score interval; always brackets the point estimate."""
    if trials <= 0:
        return (0.0, 1.0)
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class ChannelTimeline:
    """Recorded channel occupancies as (ue_id, start, end), in start order."""

    transmissions: tuple[tuple[int, TimeMicros, TimeMicros], ...]

    def busy(self, window: tuple[TimeMicros, TimeMicros],
             exclude_ue: int | None = None) -> bool:
        a, b = window
        if b <= a:
            raise ValueError("window must be nonempty")
        for ue, s, e in self.transmissions:
            if ue != exclude_ue and s < b and e > a:
                return True
        return False


def channel_busy(timeline: ChannelTimeline, window: tuple[TimeMicros, TimeMicros],
                 exclude_ue: int | None = None) -> bool:
    """True iff any recorded occupancy of another transmitter overlaps `window`."""
    return timeline.busy(window, exclude_ue=exclude_ue)


@dataclass
class UeState:
    """Mutable per-transmitter state of the reference event loop."""

    phases: list[int]
    gaps: list[int]
    code: int                      # 0: grid cycling, 1: idle-reduction retry
    allowed: int                   # -1 unlimited
    thr: int
    always: bool
    rng_state: int
    arr_frame: int = 0
    arr_time: int = _INF
    cca_time: int = _INF
    pending: bool = False
    attempts_done: int = 0
    pos: int = 0
    last_s: int = -1
    last_e: int = -1
    counters: list[int] = field(default_factory=lambda: [0] * engine.N_COUNTERS)


@dataclass(frozen=True)
class UeStats:
    """Per-transmitter outcome counters of one (or one merged) run."""

    ue_id: int
    packets: int
    tx_success: int
    drops: int
    cca_attempts: int
    suppressed_arrivals: int
    arrivals_in_own_cot: int
    alignment_sum_us: int

    def __post_init__(self):
        if self.tx_success + self.drops != self.packets:
            raise SimulationIntegrityError(
                f"ue {self.ue_id}: success {self.tx_success} + drops {self.drops}"
                f" != packets {self.packets}")

    @property
    def p_failure_emp(self) -> float:
        return self.drops / self.packets if self.packets else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_ci(self.drops, self.packets)

    @property
    def ci_low(self) -> float:
        return self.ci[0]

    @property
    def ci_high(self) -> float:
        return self.ci[1]

    @property
    def mean_alignment_us(self) -> float:
        return self.alignment_sum_us / self.packets if self.packets else 0.0


@dataclass(frozen=True)
class SimResult:
    per_ue: tuple[UeStats, ...]
    frames_simulated: int
    seed: int
    seeds: tuple[int, ...]
    fingerprint: str
    timeline: ChannelTimeline | None = None


def _mix64_py(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % 2**64
    return z ^ (z >> 31)


_GAMMA = 0x9E3779B97F4A7C15


def _draw(state: int) -> tuple[int, int]:
    state = (state + _GAMMA) % 2**64
    return _mix64_py(state), state


def _scheme_codes(scenario: ValidatedScenario) -> list[int]:
    return [1 if scenario.scheme is SchemeKind.IDLE_REDUCTION else 0
            for _ in scenario.transmitters]


def _sorted_phases(scenario: ValidatedScenario) -> list[list[int]]:
    out = []
    for i, _ in enumerate(scenario.transmitters):
        if scenario.scheme is SchemeKind.IDLE_REDUCTION:
            # retries are dynamic (+cot); the grid phase alone seeds the loop
            out.append([scenario.ue_configs[i][0].offset])
        else:
            out.append(sorted(c.offset for c in scenario.ue_configs[i]))
    return out


def _next_arrival(ue: UeState, T: int, H: int) -> None:
    f = ue.arr_frame
    t_arr = _INF
    while f < H:
        u, ue.rng_state = _draw(ue.rng_state)
        if ue.always or u < ue.thr:
            u2, ue.rng_state = _draw(ue.rng_state)
            t_arr = f * T + (u2 % T)
            f += 1
            break
        f += 1
    ue.arr_frame = f
    ue.arr_time = t_arr


def _run_reference(scenario: ValidatedScenario, H: int, seed: int,
                   record: bool):
    """Pure-Python twin of the compiled kernel (small horizons only)."""
    T = scenario.base_period
    C = scenario.cot
    all_phases = _sorted_phases(scenario)
    codes = _scheme_codes(scenario)
    ues: list[UeState] = []
    for i, tx in enumerate(scenario.transmitters):
        thr, always = engine.arrival_threshold(tx.p0)
        phases = all_phases[i]
        gaps = [((phases[(j + 1) % len(phases)] - phases[j]) % T) or T
                for j in range(len(phases))]
        cap = scenario.attempts[i]
        ues.append(UeState(
            phases=phases, gaps=gaps, code=codes[i],
            allowed=-1 if cap is None else cap, thr=thr, always=always,
            rng_state=engine.stream_state(seed, i)))
    for ue in ues:
        _next_arrival(ue, T, H)

    tx_log: list[tuple[int, int, int]] = []
    violations = 0
    while True:
        best_t, best_kind, best_i = _INF, 2, -1
        for i, ue in enumerate(ues):
            if ue.cca_time < best_t:
                best_t, best_kind, best_i = ue.cca_time, 0, i
        for i, ue in enumerate(ues):
            if ue.arr_time < best_t:
                best_t, best_kind, best_i = ue.arr_time, 1, i
        if best_i < 0:
            break
        ue = ues[best_i]
        t = best_t
        if best_kind == 0:
            ue.counters[engine.CCA_ATTEMPTS] += 1
            busy = any(o is not ue and o.last_s < t and o.last_e > t - CCA_US
                       for o in ues)
            if not busy:
                violations += sum(1 for o in ues if o is not ue and o.last_e > t)
                if ue.last_e > t:
                    violations += 1
                ue.counters[engine.SUCCESS] += 1
                ue.last_s, ue.last_e = t, t + C
                ue.pending = False
                ue.cca_time = _INF
                if record:
                    tx_log.append((best_i, t, t + C))
            else:
                ue.attempts_done += 1
                if 0 <= ue.allowed <= ue.attempts_done:
                    ue.counters[engine.DROPS] += 1
                    ue.pending = False
                    ue.cca_time = _INF
                elif ue.code == 1:
                    ue.cca_time = t + C
                else:
                    g = ue.gaps[ue.pos]
                    ue.pos = (ue.pos + 1) % len(ue.phases)
                    ue.cca_time = t + g
        else:
            if ue.pending:
                ue.counters[engine.SUPPRESSED] += 1
            else:
                ue.counters[engine.PACKETS] += 1
                if ue.last_s <= t < ue.last_e:
                    ue.counters[engine.OWN_COT_ARRIVALS] += 1
                best_e, best_nom, best_j = _INF, _INF, 0
                for j, p in enumerate(ue.phases):
                    a = t + CCA_US - p
                    k = max(1, -((-a) // T))
                    e = p + k * T
                    best_nom = min(best_nom, e)
                    while e - CCA_US < ue.last_e and e > ue.last_s:
                        e += T
                    if e < best_e:
                        best_e, best_j = e, j
                ue.counters[engine.ALIGN_SUM] += (best_nom - CCA_US) - t
                ue.pos = best_j
                ue.attempts_done = 0
                ue.pending = True
                ue.cca_time = best_e
            _next_arrival(ue, T, H)

    counters = [list(ue.counters) for ue in ues]
    return counters, violations, (tx_log if record else None)


def run(scenario: ValidatedScenario, *, horizon_frames: int | None = None,
        seed: int | None = None, record_timeline: bool = False,
        reference: bool = False) -> SimResult:
    """Simulate `horizon_frames` base periods of one scenario.

    Every accepted packet is resolved even if its retries extend past the
    horizon edge, so tx_success + drops == packets holds exactly.
    """
    H = scenario.horizon_frames if horizon_frames is None else horizon_frames
    s = scenario.seed if seed is None else seed
    if H < 1:
        raise ValueError("horizon_frames must be >= 1")
    if reference:
        counters, violations, tx_log = _run_reference(scenario, H, s, record_timeline)
    else:
        codes = _scheme_codes(scenario)
        allowed = [-1 if a is None else a for a in scenario.attempts]
        raw, violations, tx = engine.run_compiled(
            scenario.base_period, scenario.cot, H, CCA_US,
            _sorted_phases(scenario), codes, allowed,
            [t.p0 for t in scenario.transmitters], s, record_timeline)
        counters = raw.tolist()
        tx_log = [tuple(row) for row in tx.tolist()] if tx is not None else None
    if violations:
        raise SimulationIntegrityError(
            f"{violations} overlapping transmissions despite validated geometry")
    per_ue = tuple(
        UeStats(
            ue_id=i,
            packets=c[engine.PACKETS],
            tx_success=c[engine.SUCCESS],
            drops=c[engine.DROPS],
            cca_attempts=c[engine.CCA_ATTEMPTS],
            suppressed_arrivals=c[engine.SUPPRESSED],
            arrivals_in_own_cot=c[engine.OWN_COT_ARRIVALS],
            alignment_sum_us=c[engine.ALIGN_SUM],
        )
        for i, c in enumerate(counters))
    timeline = None
    if record_timeline:
        timeline = ChannelTimeline(tuple(tx_log or ()))
    return SimResult(
        per_ue=per_ue,
        frames_simulated=H,
        seed=s,
        seeds=(s,),
        fingerprint=scenario.fingerprint(horizon_frames=H),
        timeline=timeline,
    )


def merge(results: list[SimResult] | tuple[SimResult, ...]) -> SimResult:
    """Pool replications of one scenario run under distinct seeds."""
    if not results:
        raise ValueError("results must be nonempty")
    first = results[0]
    if len(results) == 1:
        return first
    for r in results[1:]:
        if r.fingerprint != first.fingerprint:
            raise MixedScenario("results come from different scenarios")
    seeds: list[int] = []
    for r in results:
        seeds.extend(r.seeds)
    if len(set(seeds)) != len(seeds):
        raise ValueError(f"replication seeds must be distinct, got {seeds}")
    q = len(first.per_ue)
    per_ue = []
    for i in range(q):
        stats = [r.per_ue[i] for r in results]
        per_ue.append(UeStats(
            ue_id=i,
            packets=sum(s.packets for s in stats),
            tx_success=sum(s.tx_success for s in stats),
            drops=sum(s.drops for s in stats),
            cca_attempts=sum(s.cca_attempts for s in stats),
            suppressed_arrivals=sum(s.suppressed_arrivals for s in stats),
            arrivals_in_own_cot=sum(s.arrivals_in_own_cot for s in stats),
            alignment_sum_us=sum(s.alignment_sum_us for s in stats),
        ))
    return SimResult(
        per_ue=tuple(per_ue),
        frames_simulated=sum(r.frames_simulated for r in results),
        seed=first.seed,
        seeds=tuple(seeds),
        fingerprint=first.fingerprint,
        timeline=None,
    )

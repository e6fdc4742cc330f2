"""Compiled event loop for the channel-access simulator.

The kernel processes a time-ordered stream of per-transmitter events
(packet arrivals and CCA window ends) without stepping microseconds.  Ties
resolve CCA before arrival, then by transmitter id.  Each transmitter owns a
splitmix64 stream derived from (seed, ue_id): one draw per frame decides the
arrival, a second draw places it uniformly inside the frame, so adding a
transmitter never perturbs the draws of the others.

The pure-Python reference in sim.py implements the identical algorithm and
draw order; both produce bit-identical counters for the same inputs.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.int64(2**62)

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# counter column layout (per transmitter)
PACKETS, SUCCESS, DROPS, CCA_ATTEMPTS, SUPPRESSED, OWN_COT_ARRIVALS, ALIGN_SUM = range(7)
N_COUNTERS = 7


def _mix64_py(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % 2**64
    return z ^ (z >> 31)


def stream_state(seed: int, ue_id: int) -> int:
    """Initial splitmix64 state for one transmitter's draw stream.

    The combined (seed, ue_id) value is passed through the output mix so the
    per-transmitter streams start at scattered positions of the underlying
    sequence rather than at adjacent, correlated offsets.
    """
    z = (seed + (ue_id + 1) * 0x9E3779B97F4A7C15) % 2**64
    return _mix64_py(_mix64_py(z) ^ ue_id)


def arrival_threshold(p0: float) -> tuple[int, bool]:
    """uint64 threshold t with P(draw < t) = 1 - p0, plus an always-arrive flag."""
    if p0 <= 0.0:
        return 0, True
    thr = int((1.0 - p0) * 2.0**64)
    return min(thr, 2**64 - 1), False


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _run_kernel(T, C, H, cca_us, n_ue, phases, nph, gaps, code, allowed,
                thr, always, states, counters, record, rec_ue, rec_s, rec_e):
    """Simulate one replication; returns (violations, recorded_tx, overflow)."""
    arr_time = np.full(n_ue, INF, dtype=np.int64)
    arr_frame = np.zeros(n_ue, dtype=np.int64)
    cca_time = np.full(n_ue, INF, dtype=np.int64)
    pending = np.zeros(n_ue, dtype=np.uint8)
    att_done = np.zeros(n_ue, dtype=np.int64)
    pos = np.zeros(n_ue, dtype=np.int64)
    last_s = np.full(n_ue, np.int64(-1), dtype=np.int64)
    last_e = np.full(n_ue, np.int64(-1), dtype=np.int64)
    uT = np.uint64(T)
    violations = np.int64(0)
    rec_n = np.int64(0)
    overflow = np.int64(0)

    # prime each transmitter's first arrival
    for i in range(n_ue):
        f = arr_frame[i]
        t_arr = INF
        while f < H:
            states[i] = states[i] + _GAMMA
            u = _mix64(states[i])
            if always[i] == 1 or u < thr[i]:
                states[i] = states[i] + _GAMMA
                u2 = _mix64(states[i])
                t_arr = f * T + np.int64(u2 % uT)
                f += 1
                break
            f += 1
        arr_frame[i] = f
        arr_time[i] = t_arr

    while True:
        best_t = INF
        best_kind = 2
        best_ue = -1
        for i in range(n_ue):
            if cca_time[i] < best_t:
                best_t = cca_time[i]
                best_kind = 0
                best_ue = i
        for i in range(n_ue):
            if arr_time[i] < best_t:
                best_t = arr_time[i]
                best_kind = 1
                best_ue = i
        if best_ue < 0:
            break
        i = best_ue
        t = best_t

        if best_kind == 0:
            # CCA decision at window [t - cca_us, t)
            counters[i, CCA_ATTEMPTS] += 1
            busy = False
            for j in range(n_ue):
                if j != i and last_s[j] < t and last_e[j] > t - cca_us:
                    busy = True
                    break
            if not busy:
                for j in range(n_ue):
                    if j != i and last_e[j] > t:
                        violations += 1
                if last_e[i] > t:
                    violations += 1
                counters[i, SUCCESS] += 1
                last_s[i] = t
                last_e[i] = t + C
                pending[i] = 0
                cca_time[i] = INF
                if record == 1:
                    if rec_n < rec_ue.shape[0]:
                        rec_ue[rec_n] = i
                        rec_s[rec_n] = t
                        rec_e[rec_n] = t + C
                        rec_n += 1
                    else:
                        overflow = 1
            else:
                att_done[i] += 1
                if allowed[i] >= 0 and att_done[i] >= allowed[i]:
                    counters[i, DROPS] += 1
                    pending[i] = 0
                    cca_time[i] = INF
                elif code[i] == 1:
                    # idle wait removed: next sensing one occupancy time later
                    cca_time[i] = t + C
                else:
                    g = gaps[i, pos[i]]
                    pos[i] = (pos[i] + 1) % nph[i]
                    cca_time[i] = t + g
        else:
            # arrival at t
            if pending[i] == 1:
                counters[i, SUPPRESSED] += 1
            else:
                counters[i, PACKETS] += 1
                if last_s[i] <= t and t < last_e[i]:
                    counters[i, OWN_COT_ARRIVALS] += 1
                # earliest usable window over all phases; a window overlapping
                # the transmitter's own active occupancy is skipped.  The
                # alignment statistic records the wait to the closest grid
                # occasion regardless of that skip.
                best_e = INF
                best_nom = INF
                best_j = 0
                for j in range(nph[i]):
                    p = phases[i, j]
                    a = t + cca_us - p
                    k = -((-a) // T)
                    if k < 1:
                        k = 1
                    e = p + k * T
                    if e < best_nom:
                        best_nom = e
                    while e - cca_us < last_e[i] and e > last_s[i]:
                        e += T
                    if e < best_e:
                        best_e = e
                        best_j = j
                counters[i, ALIGN_SUM] += (best_nom - cca_us) - t
                pos[i] = best_j
                att_done[i] = 0
                pending[i] = 1
                cca_time[i] = best_e
            # draw the next arrival
            f = arr_frame[i]
            t_arr = INF
            while f < H:
                states[i] = states[i] + _GAMMA
                u = _mix64(states[i])
                if always[i] == 1 or u < thr[i]:
                    states[i] = states[i] + _GAMMA
                    u2 = _mix64(states[i])
                    t_arr = f * T + np.int64(u2 % uT)
                    f += 1
                    break
                f += 1
            arr_frame[i] = f
            arr_time[i] = t_arr

    return violations, rec_n, overflow


def run_compiled(T: int, C: int, H: int, cca_us: int,
                 phases_sorted: list[list[int]], codes: list[int],
                 allowed: list[int], p0s: list[float], seed: int,
                 record: bool) -> tuple[np.ndarray, int, np.ndarray | None]:
    """Drive the kernel; returns (counters, violations, tx_record or None)."""
    n_ue = len(phases_sorted)
    max_ph = max(len(p) for p in phases_sorted)
    phases = np.zeros((n_ue, max_ph), dtype=np.int64)
    gaps = np.zeros((n_ue, max_ph), dtype=np.int64)
    nph = np.zeros(n_ue, dtype=np.int64)
    for i, ph in enumerate(phases_sorted):
        nph[i] = len(ph)
        for j, p in enumerate(ph):
            phases[i, j] = p
        for j in range(len(ph)):
            nxt = ph[(j + 1) % len(ph)]
            g = (nxt - ph[j]) % T
            gaps[i, j] = g if g > 0 else T

    thr = np.zeros(n_ue, dtype=np.uint64)
    always = np.zeros(n_ue, dtype=np.uint8)
    states = np.zeros(n_ue, dtype=np.uint64)
    for i, p0 in enumerate(p0s):
        t, a = arrival_threshold(p0)
        thr[i] = t
        always[i] = 1 if a else 0
        states[i] = stream_state(seed, i)

    counters = np.zeros((n_ue, N_COUNTERS), dtype=np.int64)
    cap = n_ue * H if record else 1
    rec_ue = np.zeros(cap, dtype=np.int64)
    rec_s = np.zeros(cap, dtype=np.int64)
    rec_e = np.zeros(cap, dtype=np.int64)

    violations, rec_n, overflow = _run_kernel(
        np.int64(T), np.int64(C), np.int64(H), np.int64(cca_us),
        n_ue, phases, nph, gaps,
        np.asarray(codes, dtype=np.int64),
        np.asarray(allowed, dtype=np.int64),
        thr, always, states, counters,
        np.int64(1 if record else 0), rec_ue, rec_s, rec_e)
    if overflow:
        raise MemoryError("transmission record overflow; rerun without recording")
    tx = None
    if record:
        tx = np.stack([rec_ue[:rec_n], rec_s[:rec_n], rec_e[:rec_n]], axis=1)
    return counters, int(violations), tx

"""Scenario sweeps, analytic-vs-empirical comparison tables and CSV output.

Desk-scale defaults are 1e7 frames per point with 10 replications.  Every
comparison row carries both the solved blocking prediction and the pooled
empirical rate with a 3-sigma interval; points whose expected drop count is
below 30 are flagged insufficient, and points whose empirical rate falls
outside the 3-sigma radius around the prediction are flagged as a model gap
(the closed forms treat competing transmissions as independent across sensing
attempts, which a shared-channel timeline does not satisfy; the row flags make
the gap visible instead of hiding it).
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import analytic, sim
from .core import (ScenarioSpec, SchemeKind, TransmitterSpec, ValidatedScenario,
                   uniform_transmitters, validate_scenario)
from .errors import EmptySeries, ScenarioValidationError

log = logging.getLogger(__name__)

DEFAULT_FRAMES_PER_POINT = 10_000_000
DEFAULT_REPLICATIONS = 10
MIN_EXPECTED_EVENTS = 30.0
_POINT_SEED_STRIDE = 1_000_003

CSV_HEADER = ("scheme,q,ue_index,p0,attempts,p_fail_analytic,p_fail_emp,"
              "ci_low,ci_high,frames,seed")


@dataclass(frozen=True)
class SweepSpec:
    """One axis sweep over a base scenario."""

    base_scenario: ScenarioSpec
    axis: str                      # one of: q, n_configs, p0
    values: tuple
    frames_per_point: int = DEFAULT_FRAMES_PER_POINT
    replications: int = DEFAULT_REPLICATIONS

    def __post_init__(self):
        if self.axis not in ("q", "n_configs", "p0"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ValueError("values must be nonempty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass
class ComparisonRow:
    """One sweep point (pooled, per class, or per transmitter).

    ue_index is -1 for a pooled symmetric row, otherwise the lowest ue_id of
    the group the row describes.  Fields beyond the CSV columns are run
    diagnostics and are not serialized.
    """

    scheme: str
    q: int
    ue_index: int
    p0: float
    attempts: int | None
    p_fail_analytic: float
    p_fail_emp: float
    ci_low: float
    ci_high: float
    frames: int
    seed: int
    packets: int = 0
    drops: int = 0
    expected_failures: float = 0.0
    insufficient_events: bool = False
    model_gap: bool = False
    failed: str | None = None
    x_value: float = 0.0           # sweep axis value this row belongs to


def apply_axis(base: ScenarioSpec, axis: str, value) -> ScenarioSpec:
    """Clone `base` with one axis changed; q resizes from the first transmitter."""
    if axis == "q":
        template = base.transmitters[0]
        txs = tuple(replace(
            template, ue_id=i,
            priority_rank=(i + 1 if template.priority_rank is not None else None))
            for i in range(int(value)))
        return replace(base, transmitters=txs)
    if axis == "n_configs":
        txs = tuple(replace(t, n_configs=int(value), m_budget=None)
                    for t in base.transmitters)
        return replace(base, transmitters=txs)
    txs = tuple(replace(t, p0=float(value)) for t in base.transmitters)
    return replace(base, transmitters=txs)


def _run_replication(args) -> sim.SimResult:
    scenario, frames, seed = args
    return sim.run(scenario, horizon_frames=frames, seed=seed)


def run_replications(scenario: ValidatedScenario, frames: int, seeds: list[int],
                     workers: int | None = None) -> sim.SimResult:
    """Run and merge seeded replications; merge order is seed-list order."""
    tasks = [(scenario, frames, s) for s in seeds]
    if workers is not None and workers <= 1 or len(tasks) == 1:
        results = [_run_replication(t) for t in tasks]
    else:
        max_workers = workers or min(len(tasks), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(_run_replication, tasks))
    return sim.merge(results)


def _group_rows(spec: ScenarioSpec, scenario: ValidatedScenario | None,
                result: analytic.AnalyticResult, merged: sim.SimResult | None,
                seed: int, x_value: float, failed: str | None) -> list[ComparisonRow]:
    """One row per transmitter group: pooled / per class / per rank."""
    q = len(spec.transmitters)
    if spec.scheme is SchemeKind.PRIORITY_ARRANGED:
        groups = [[i] for i in range(q)]
    else:
        by_class: dict[tuple, list[int]] = {}
        for i, t in enumerate(spec.transmitters):
            by_class.setdefault((t.p0, result.per_ue_attempts[i]), []).append(i)
        groups = list(by_class.values())
        if len(groups) == 1:
            groups = [list(range(q))]
    rows = []
    for members in groups:
        i0 = members[0]
        pooled = len(groups) == 1 and len(members) == q \
            and spec.scheme is not SchemeKind.PRIORITY_ARRANGED
        p_a = result.per_ue_failure[i0]
        if merged is not None:
            packets = sum(merged.per_ue[i].packets for i in members)
            drops = sum(merged.per_ue[i].drops for i in members)
            p_emp = drops / packets if packets else 0.0
            ci_lo, ci_hi = sim.wilson_ci(drops, packets)
            frames = merged.frames_simulated
            expected = p_a * packets
            insufficient = expected < MIN_EXPECTED_EVENTS
            radius = analytic.binomial_radius(p_a, packets)
            gap = (not insufficient) and abs(p_emp - p_a) > radius
        else:
            packets = drops = 0
            p_emp = ci_lo = ci_hi = math.nan
            frames = 0
            expected = 0.0
            insufficient = True
            gap = False
        rows.append(ComparisonRow(
            scheme=spec.scheme.value,
            q=q,
            ue_index=-1 if pooled else i0,
            p0=spec.transmitters[i0].p0,
            attempts=result.per_ue_attempts[i0],
            p_fail_analytic=p_a,
            p_fail_emp=p_emp,
            ci_low=ci_lo,
            ci_high=ci_hi,
            frames=frames,
            seed=seed,
            packets=packets,
            drops=drops,
            expected_failures=expected,
            insufficient_events=insufficient,
            model_gap=gap,
            failed=failed,
            x_value=x_value,
        ))
    return rows


def summarize_point(spec: ScenarioSpec, merged: sim.SimResult, seed: int,
                    x_value: float | None = None) -> list[ComparisonRow]:
    """Comparison rows for an already-simulated scenario."""
    result = analytic.analyze_spec(spec)
    x = x_value if x_value is not None else float(len(spec.transmitters))
    return _group_rows(spec, None, result, merged, seed, x, None)


def run_point(spec: ScenarioSpec, frames: int, replications: int, seed: int,
              x_value: float | None = None, workers: int | None = None,
              ) -> list[ComparisonRow]:
    """Analytic prediction plus merged replications for one scenario.

    A scenario whose timing cannot be materialized still yields rows (the
    prediction needs no offsets); its empirical fields are NaN and `failed`
    names the violated constraint.
    """
    result = analytic.analyze_spec(spec)
    x = x_value if x_value is not None else float(len(spec.transmitters))
    try:
        scenario = validate_scenario(spec)
    except ScenarioValidationError as exc:
        log.warning("point failed validation: %s: %s", type(exc).__name__, exc)
        return _group_rows(spec, None, result, None, seed, x, type(exc).__name__)
    seeds = [seed + r for r in range(replications)]
    merged = run_replications(scenario, frames, seeds, workers=workers)
    return _group_rows(spec, scenario, result, merged, seed, x, None)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[ComparisonRow]:
    """Rows for every axis value; failed points carry NaN empirical fields."""
    rows: list[ComparisonRow] = []
    for idx, value in enumerate(spec.values):
        point = apply_axis(spec.base_scenario, spec.axis, value)
        seed = spec.base_scenario.seed + idx * _POINT_SEED_STRIDE
        rows.extend(run_point(
            point, spec.frames_per_point, spec.replications, seed,
            x_value=float(value), workers=workers))
    return rows


def audit_rows(rows: list[ComparisonRow]) -> float:
    """Max self-consistency residual of rows recomputable from their own fields.

    Pooled symmetric rows are checked against the coupling fixed point;
    homogeneous priority rows against the rank recursion.  Heterogeneous
    class rows carry context beyond their own fields and are verified at
    solve time instead.
    """
    worst = 0.0
    for row in rows:
        if (row.scheme == SchemeKind.PRIORITY_ARRANGED.value
                and row.ue_index >= 0 and row.attempts == 1):
            chain = analytic.priority_chain(row.p0, row.q)
            worst = max(worst, abs(chain[row.ue_index] - row.p_fail_analytic))
        elif row.ue_index == -1 and row.attempts is not None:
            pc = row.p_fail_analytic ** (1.0 / row.attempts)
            worst = max(worst, analytic.coupling_residual(
                pc, row.p0, row.attempts, row.q))
    return worst


def _fmt(x) -> str:
    if x is None:
        return "inf"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".6g")
    return str(x)


def write_csv(rows: list[ComparisonRow], path: str | Path) -> None:
    """Deterministic UTF-8 CSV with the pinned 11-column header."""
    if not rows:
        raise ValueError("rows must be nonempty")
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.scheme, str(r.q), str(r.ue_index), _fmt(r.p0), _fmt(r.attempts),
            _fmt(r.p_fail_analytic), _fmt(r.p_fail_emp), _fmt(r.ci_low),
            _fmt(r.ci_high), str(r.frames), str(r.seed)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def series_key(row: ComparisonRow) -> tuple[str, str]:
    att = "inf" if row.attempts is None else str(row.attempts)
    return row.scheme, att


def _write_series(points: list[tuple[float, ComparisonRow]], path: Path) -> Path:
    points = sorted(points, key=lambda p: p[0])
    xs = [x for x, _ in points]
    if len(set(xs)) != len(xs):
        raise EmptySeries(f"duplicate x values in series {path.name}")
    lines = [
        "# blocking-probability series; advisory: plot y on a log scale",
        "# x p_fail_emp p_fail_analytic",
    ]
    for x, r in points:
        lines.append(f"{_fmt(x)} {_fmt(r.p_fail_emp)} {_fmt(r.p_fail_analytic)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def emit_plot_data(rows: list[ComparisonRow], out_dir: str | Path,
                   tag: str) -> list[Path]:
    """One whitespace-delimited series file per (scheme, attempts) group.

    Columns are x (axis value, or transmitter index for priority rows), the
    empirical failure rate and the analytic value; x is strictly increasing
    within a file.  A priority sweep spanning several system sizes yields one
    rank-curve file per sweep point (suffix _q<size>).
    """
    if not rows:
        raise EmptySeries("no rows to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple[str, str], list[ComparisonRow]] = {}
    for row in rows:
        groups.setdefault(series_key(row), []).append(row)
    paths = []
    for (scheme, att), grp in groups.items():
        pri = scheme == SchemeKind.PRIORITY_ARRANGED.value
        if pri and len({r.x_value for r in grp}) > 1:
            for x in sorted({r.x_value for r in grp}):
                pts = [(float(r.ue_index + 1), r) for r in grp if r.x_value == x]
                paths.append(_write_series(
                    pts, out_dir / f"{tag}_{scheme}_{att}_q{x:g}.dat"))
            continue
        pts = [(float(r.ue_index + 1) if pri else r.x_value, r) for r in grp]
        paths.append(_write_series(pts, out_dir / f"{tag}_{scheme}_{att}.dat"))
    return paths


# ---------------------------------------------------------------------------
# figure-reproduction presets

TIMING_DEFAULT = dict(base_period=1000, cot=900)
TIMING_RANKED = dict(base_period=1000, cot=650, priority_offset_step=40)
# coexistence scenario; the priority side needs a shorter occupancy so the
# staggered sensing slots of up to ten transmitters fit inside the idle tail
COEX_CRITICAL_P0 = 0.99
COEX_BULK_P0 = 0.5
TIMING_RANKED_DENSE = dict(base_period=1000, cot=650, priority_offset_step=25)

PRESET_NAMES = ("fig7", "fig8", "fig15", "fig16", "fig17", "fig22", "fig23")


@dataclass(frozen=True)
class PresetPoint:
    label: str                     # series disambiguator beyond (scheme, n)
    spec: ScenarioSpec
    x_value: float
    per_rank_series: bool = False  # plot one point per priority rank


def _conv_spec(q: int, p0: float, seed: int) -> ScenarioSpec:
    return ScenarioSpec(
        scheme=SchemeKind.CONVENTIONAL,
        transmitters=uniform_transmitters(q, p0, k_max=0),
        seed=seed, **TIMING_DEFAULT)


def _multi_spec(q: int, p0: float, n: int, seed: int) -> ScenarioSpec:
    return ScenarioSpec(
        scheme=SchemeKind.MULTI_CONFIG,
        transmitters=uniform_transmitters(q, p0, k_max=0, n_configs=n),
        seed=seed, **TIMING_DEFAULT)


def _baseline_spec(q: int, p0: float, seed: int) -> ScenarioSpec:
    return ScenarioSpec(
        scheme=SchemeKind.IDLE_REDUCTION,
        transmitters=uniform_transmitters(q, p0, k_max=None, latency_budget=1000),
        seed=seed, **TIMING_DEFAULT)


def _priority_spec(q: int, p0: float, seed: int) -> ScenarioSpec:
    return ScenarioSpec(
        scheme=SchemeKind.PRIORITY_ARRANGED,
        transmitters=uniform_transmitters(q, p0, k_max=0),
        seed=seed, **TIMING_RANKED)


def _coex_multi_spec(urllc: int, seed: int) -> ScenarioSpec:
    txs = tuple(TransmitterSpec(ue_id=i, p0=COEX_CRITICAL_P0, k_max=0, n_configs=4)
                for i in range(urllc))
    txs += (TransmitterSpec(ue_id=urllc, p0=COEX_BULK_P0, k_max=None),)
    return ScenarioSpec(scheme=SchemeKind.MULTI_CONFIG, transmitters=txs,
                        seed=seed, **TIMING_DEFAULT)


def _coex_priority_spec(urllc: int, seed: int) -> ScenarioSpec:
    txs = tuple(TransmitterSpec(ue_id=i, p0=COEX_CRITICAL_P0, k_max=0,
                                priority_rank=i + 1)
                for i in range(urllc))
    txs += (TransmitterSpec(ue_id=urllc, p0=COEX_BULK_P0, k_max=None,
                            priority_rank=urllc + 1),)
    return ScenarioSpec(scheme=SchemeKind.PRIORITY_ARRANGED, transmitters=txs,
                        seed=seed, **TIMING_RANKED_DENSE)


def preset_points(name: str, seed: int) -> list[PresetPoint]:
    qs = range(2, 11)
    if name in ("fig7", "fig8"):
        p0 = 0.99 if name == "fig7" else 0.95
        pts = [PresetPoint("", _conv_spec(q, p0, seed), float(q)) for q in qs]
        for n in (2, 3, 4):
            pts += [PresetPoint("", _multi_spec(q, p0, n, seed), float(q))
                    for q in qs]
        return pts
    if name == "fig15":
        return [PresetPoint(f"p{p0 * 100:.0f}", _priority_spec(9, p0, seed), 9.0,
                            per_rank_series=True)
                for p0 in (0.99, 0.95)]
    if name == "fig16":
        pts = [PresetPoint("", _conv_spec(q, 0.99, seed), float(q)) for q in qs]
        pts += [PresetPoint("", _multi_spec(q, 0.99, 4, seed), float(q)) for q in qs]
        pts += [PresetPoint("", _priority_spec(9, 0.99, seed), 9.0,
                            per_rank_series=True)]
        return pts
    if name == "fig17":
        pts = [PresetPoint("multi", _coex_multi_spec(u, seed), float(u))
               for u in range(1, 10)]
        pts += [PresetPoint("priority", _coex_priority_spec(u, seed), float(u))
                for u in range(1, 10)]
        return pts
    if name in ("fig22", "fig23"):
        p0 = 0.99 if name == "fig22" else 0.95
        pts = [PresetPoint("", _baseline_spec(q, p0, seed), float(q))
               for q in range(2, 7)]
        for n in (2, 3, 4):
            pts += [PresetPoint("", _multi_spec(q, p0, n, seed), float(q))
                    for q in range(2, 7)]
        return pts
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def _spec_as_dict(spec: ScenarioSpec) -> dict:
    d = dataclasses.asdict(spec)
    d["scheme"] = spec.scheme.value
    d["transmitters"] = [dataclasses.asdict(t) for t in spec.transmitters]
    return d


def _series_x(pt: PresetPoint, row: ComparisonRow) -> float:
    """Series x coordinate: the priority rank for per-rank presets, otherwise
    the preset x value (transmitter count)."""
    if pt.per_rank_series:
        return float(row.ue_index + 1)
    return pt.x_value


def _series_pick(name: str, pt: PresetPoint, row: ComparisonRow) -> bool:
    """Whether a row belongs to the plotted series of its preset.

    For the coexistence preset only the latency-critical transmitters are
    plotted: the pooled class row on the staggered-grid side and the
    lowest-priority latency-critical rank on the priority side.
    """
    if name != "fig17":
        return True
    urllc = int(pt.x_value)
    if row.scheme == SchemeKind.PRIORITY_ARRANGED.value:
        return row.ue_index == urllc - 1
    return row.p0 == COEX_CRITICAL_P0


def reproduce(name: str, out_dir: str | Path,
              frames: int = DEFAULT_FRAMES_PER_POINT,
              replications: int = DEFAULT_REPLICATIONS,
              seed: int = 2024, workers: int | None = None,
              quiet: bool = False) -> list[Path]:
    """Run one figure preset and write CSVs, plot series and a run manifest."""
    points = preset_points(name, seed)
    out = Path(out_dir) / name
    out.mkdir(parents=True, exist_ok=True)
    rows_by_file: dict[str, list[ComparisonRow]] = {}
    series_by_file: dict[str, list[tuple[float, ComparisonRow]]] = {}
    manifest_points = []
    for idx, pt in enumerate(points):
        point_seed = seed + idx * _POINT_SEED_STRIDE
        rows = run_point(pt.spec, frames, replications, point_seed,
                         x_value=pt.x_value, workers=workers)
        if not quiet:
            log.info("%s point %d/%d done", name, idx + 1, len(points))
        for row in rows:
            scheme, att = series_key(row)
            stem = f"{name}_{scheme}_{att}"
            if pt.label:
                stem += f"_{pt.label}"
            rows_by_file.setdefault(stem, []).append(row)
            if _series_pick(name, pt, row):
                series_by_file.setdefault(stem, []).append((_series_x(pt, row), row))
        manifest_points.append({
            "label": pt.label,
            "x": pt.x_value,
            "scenario": _spec_as_dict(pt.spec),
            "seeds": [point_seed + r for r in range(replications)],
            "failed": rows[0].failed,
        })
    written: list[Path] = []
    for stem in sorted(rows_by_file):
        csv_path = out / f"{stem}.csv"
        write_csv(rows_by_file[stem], csv_path)
        written.append(csv_path)
        if stem in series_by_file:
            written.append(_write_series(series_by_file[stem], out / f"{stem}.dat"))
    manifest = {
        "preset": name,
        "frames_per_point": frames,
        "replications": replications,
        "seed": seed,
        "points": manifest_points,
    }
    mpath = out / "run_manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                     encoding="utf-8")
    written.append(mpath)
    return written

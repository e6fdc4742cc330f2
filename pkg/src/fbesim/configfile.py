"""Scenario config files: flat key = value text with one section per transmitter.

Scenario-level keys: scheme, q, period_us, cot_us, priority_offset_us,
horizon_frames, seed.  Transmitter keys (valid at scenario level as a default
for every transmitter, or inside a ``[ue N]`` section as an override): p0,
k_max (``inf`` allowed), n_configs, m_budget.  Unknown keys are rejected.
Priority ranks follow transmitter order: ue 0 is the highest priority.

Example::

    scheme = multi_config
    q = 2
    p0 = 0.99
    k_max = 0
    n_configs = 2
    period_us = 1000
    cot_us = 900
    horizon_frames = 1000000
    seed = 42

    [ue 1]
    p0 = 0.95
"""

from __future__ import annotations

import re
from pathlib import Path

from .core import ScenarioSpec, SchemeKind, TransmitterSpec
from .errors import ConfigFileError

_SCENARIO_KEYS = {
    "scheme", "q", "period_us", "cot_us", "priority_offset_us",
    "horizon_frames", "seed",
}
_UE_KEYS = {"p0", "k_max", "n_configs", "m_budget"}

_SCHEME_ALIASES = {
    "conventional": SchemeKind.CONVENTIONAL,
    "multi_config": SchemeKind.MULTI_CONFIG,
    "multi": SchemeKind.MULTI_CONFIG,
    "priority_arranged": SchemeKind.PRIORITY_ARRANGED,
    "priority": SchemeKind.PRIORITY_ARRANGED,
    "idle_reduction": SchemeKind.IDLE_REDUCTION,
    "idle_reduction_baseline": SchemeKind.IDLE_REDUCTION,
}

_SECTION_RE = re.compile(r"^\[\s*ue\s+(\d+)\s*\]$")


def _parse_int(key: str, raw: str, line_no: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigFileError(f"line {line_no}: {key} expects an integer, got {raw!r}")


def _parse_float(key: str, raw: str, line_no: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigFileError(f"line {line_no}: {key} expects a number, got {raw!r}")


def parse_scenario_text(text: str) -> ScenarioSpec:
    scenario: dict[str, tuple[str, int]] = {}
    ue_defaults: dict[str, tuple[str, int]] = {}
    ue_overrides: dict[int, dict[str, tuple[str, int]]] = {}
    current: dict[str, tuple[str, int]] | None = None

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            idx = int(m.group(1))
            current = ue_overrides.setdefault(idx, {})
            continue
        if line.startswith("["):
            raise ConfigFileError(f"line {line_no}: bad section header {line!r}")
        if "=" not in line:
            raise ConfigFileError(f"line {line_no}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not value:
            raise ConfigFileError(f"line {line_no}: empty value for {key!r}")
        if current is not None:
            if key not in _UE_KEYS:
                raise ConfigFileError(f"line {line_no}: unknown transmitter key {key!r}")
            if key in current:
                raise ConfigFileError(f"line {line_no}: duplicate key {key!r}")
            current[key] = (value, line_no)
        elif key in _SCENARIO_KEYS:
            if key in scenario:
                raise ConfigFileError(f"line {line_no}: duplicate key {key!r}")
            scenario[key] = (value, line_no)
        elif key in _UE_KEYS:
            if key in ue_defaults:
                raise ConfigFileError(f"line {line_no}: duplicate key {key!r}")
            ue_defaults[key] = (value, line_no)
        else:
            raise ConfigFileError(f"line {line_no}: unknown key {key!r}")

    if "scheme" not in scenario:
        raise ConfigFileError("missing required key 'scheme'")
    raw_scheme = scenario["scheme"][0].lower()
    if raw_scheme not in _SCHEME_ALIASES:
        raise ConfigFileError(
            f"unknown scheme {raw_scheme!r}; expected one of "
            f"{sorted(set(a for a in _SCHEME_ALIASES))}")
    scheme = _SCHEME_ALIASES[raw_scheme]

    if "q" in scenario:
        q = _parse_int("q", *scenario["q"])
    elif ue_overrides:
        q = max(ue_overrides) + 1
    else:
        raise ConfigFileError("missing required key 'q' (and no [ue N] sections)")
    if q < 1:
        raise ConfigFileError("q must be >= 1")
    for idx in ue_overrides:
        if idx >= q:
            raise ConfigFileError(f"section [ue {idx}] outside q={q}")

    def ue_value(idx: int, key: str) -> tuple[str, int] | None:
        if idx in ue_overrides and key in ue_overrides[idx]:
            return ue_overrides[idx][key]
        return ue_defaults.get(key)

    transmitters = []
    for i in range(q):
        kwargs: dict = {"ue_id": i}
        got = ue_value(i, "p0")
        if got is None:
            raise ConfigFileError(f"p0 missing for ue {i}")
        kwargs["p0"] = _parse_float("p0", *got)
        got = ue_value(i, "k_max")
        if got is not None:
            kwargs["k_max"] = None if got[0].lower() == "inf" else _parse_int("k_max", *got)
        got = ue_value(i, "n_configs")
        if got is not None:
            kwargs["n_configs"] = _parse_int("n_configs", *got)
        got = ue_value(i, "m_budget")
        if got is not None:
            kwargs["m_budget"] = _parse_int("m_budget", *got)
        if scheme is SchemeKind.PRIORITY_ARRANGED:
            kwargs["priority_rank"] = i + 1
        if scheme is SchemeKind.IDLE_REDUCTION:
            kwargs["latency_budget"] = 1000
        transmitters.append(TransmitterSpec(**kwargs))

    spec_kwargs: dict = {"scheme": scheme, "transmitters": tuple(transmitters)}
    if "period_us" in scenario:
        spec_kwargs["base_period"] = _parse_int("period_us", *scenario["period_us"])
    if "cot_us" in scenario:
        spec_kwargs["cot"] = _parse_int("cot_us", *scenario["cot_us"])
    if "priority_offset_us" in scenario:
        spec_kwargs["priority_offset_step"] = _parse_int(
            "priority_offset_us", *scenario["priority_offset_us"])
    if "horizon_frames" in scenario:
        spec_kwargs["horizon_frames"] = _parse_int(
            "horizon_frames", *scenario["horizon_frames"])
    if "seed" in scenario:
        spec_kwargs["seed"] = _parse_int("seed", *scenario["seed"])
    return ScenarioSpec(**spec_kwargs)


def parse_scenario_file(path: str | Path) -> ScenarioSpec:
    return parse_scenario_text(Path(path).read_text(encoding="utf-8"))

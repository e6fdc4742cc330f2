"""Frame-based channel access in unlicensed spectrum.

A library for modeling listen-before-talk channel access on a fixed frame
grid: closed-form blocking probabilities of the coupled retry chains, a
deterministic discrete-event simulator of Q transmitters sharing one channel,
and sweep/reproduction tooling that compares the two side by side.
"""

from . import errors
from .analytic import (AnalyticResult, StationaryDistribution, alignment_time_mean,
                       analyze, analyze_spec, binomial_radius, coupling_residual,
                       p_failure, p_trans, priority_chain, priority_chain_mixed,
                       solve_pc, solve_pc_classes, stationary_distribution)
from .configfile import parse_scenario_file, parse_scenario_text
from .core import (ALLOWED_PERIODS_US, CCA_US, MIN_IDLE_US, URLLC_BUDGET_US,
                   FfpConfig, ScenarioSpec, SchemeKind, TimeMicros,
                   TransmitterSpec, ValidatedScenario, allowed_attempts,
                   cca_windows, next_cca_after, uniform_transmitters,
                   validate_scenario, with_horizon)
from .experiments import (ComparisonRow, SweepSpec, audit_rows, emit_plot_data,
                          preset_points, reproduce, run_point, run_replications,
                          run_sweep, summarize_point, write_csv)
from .sim import (ChannelTimeline, SimResult, UeState, UeStats, channel_busy,
                  merge, run, wilson_ci)

__version__ = "0.1.0"

__all__ = [
    "ALLOWED_PERIODS_US", "CCA_US", "MIN_IDLE_US", "URLLC_BUDGET_US",
    "AnalyticResult", "ChannelTimeline", "ComparisonRow", "FfpConfig",
    "ScenarioSpec", "SchemeKind", "SimResult", "StationaryDistribution",
    "SweepSpec", "TimeMicros", "TransmitterSpec", "UeState", "UeStats",
    "ValidatedScenario", "alignment_time_mean", "allowed_attempts", "analyze",
    "analyze_spec", "audit_rows", "binomial_radius", "cca_windows",
    "channel_busy", "coupling_residual", "emit_plot_data", "errors", "merge",
    "next_cca_after", "p_failure", "p_trans", "parse_scenario_file",
    "parse_scenario_text", "preset_points", "priority_chain",
    "priority_chain_mixed", "reproduce", "run", "run_point",
    "run_replications", "run_sweep", "solve_pc", "solve_pc_classes",
    "stationary_distribution", "summarize_point", "uniform_transmitters",
    "validate_scenario", "wilson_ci", "with_horizon", "write_csv",
]

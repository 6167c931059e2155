"""Slot-time allocation for a wirelessly powered shared-spectrum network.

One charging phase feeds a primary pair and N secondary pairs that then
transmit in turn; this package computes the throughput-optimal split of the
slot subject to a minimum primary rate, checks it against closed-form-free
numerical routes, and runs the surrounding experiments.
"""

from .model import (
    ChannelGains,
    SystemParams,
    Topology,
    channel_gain,
    dbm_to_watts,
    dedicated_only_snr_vector,
    effective_snr_vector,
    gains_from_topology,
    harvested_energy,
    sum_throughput,
    throughput,
)
from .solver import (
    GslsConfig,
    GoldenSectionResult,
    InfeasibleRateError,
    SolverOutcome,
    golden_section_eval_bound,
    golden_section_search,
    lambert_w0,
    marginal_rate,
    max_primary_rate,
    optimal_snr_factor,
    solve,
    solve_constrained,
    solve_unconstrained,
    wpt_time_for_rate,
)
from .oracle import (
    KktReport,
    ascent_oracle,
    fd_gradient,
    fd_hessian,
    grid_oracle,
    kkt_residuals,
    rate_constraint_hessian,
    rate_gradient,
    rates_batch,
    throughput_hessian,
)
from .baselines import SchemeReport, benchmark_ta, evaluate_scheme, uniform_ta
from .estimators import TimeAllocationOptimizer, UniformTimeAllocator
from .experiments import (
    ScenarioConfig,
    fig3_sweep,
    improvement_summary,
    load_config,
    place_nodes,
    run_scenario,
    sweep,
    topology_for,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelGains", "SystemParams", "Topology", "channel_gain", "dbm_to_watts",
    "dedicated_only_snr_vector", "effective_snr_vector", "gains_from_topology",
    "harvested_energy", "sum_throughput", "throughput",
    "GslsConfig", "GoldenSectionResult", "InfeasibleRateError", "SolverOutcome",
    "golden_section_eval_bound", "golden_section_search", "lambert_w0",
    "marginal_rate", "max_primary_rate", "optimal_snr_factor", "solve",
    "solve_constrained", "solve_unconstrained", "wpt_time_for_rate",
    "KktReport", "ascent_oracle", "fd_gradient", "fd_hessian", "grid_oracle",
    "kkt_residuals", "rate_constraint_hessian", "rate_gradient", "rates_batch",
    "throughput_hessian",
    "SchemeReport", "benchmark_ta", "evaluate_scheme", "uniform_ta",
    "TimeAllocationOptimizer", "UniformTimeAllocator",
    "ScenarioConfig", "fig3_sweep", "improvement_summary", "load_config",
    "place_nodes", "run_scenario", "sweep", "topology_for",
    "__version__",
]

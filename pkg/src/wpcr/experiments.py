"""Scenario construction and parameter-sweep experiments.

Everything here is seed-deterministic: the same config and seed produce the
same topologies, the same solves, and byte-identical CSV downstream.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import FLOOR_SLACK, SchemeReport, benchmark_ta, evaluate_scheme, uniform_ta
from .model import (
    SystemParams,
    Topology,
    dbm_to_watts,
    effective_snr_vector,
    gains_from_topology,
    sum_throughput,
    throughput,
)
from .solver import GslsConfig, solve

__all__ = [
    "ScenarioConfig",
    "load_config",
    "place_nodes",
    "topology_for",
    "run_scenario",
    "fig3_sweep",
    "sweep",
    "improvement_summary",
    "SWEEP_FIELDS",
]

# Sweepable config axis -> SystemParams field.
SWEEP_FIELDS = {
    "L": "l_field",
    "eta": "eta",
    "N": "n_su",
    "delta": "delta",
    "P0": "p0",
}

_PLACEMENT_ATTEMPTS = 10_000


@dataclass
class ScenarioConfig:
    params: SystemParams = field(default_factory=SystemParams)
    placement: str = "random"
    sweep_name: str | None = None
    sweep_min: float = 0.0
    sweep_max: float = 0.0
    sweep_steps: int = 0
    trials: int = 1
    tau0_grid: int = 1000
    xi: float = 1e-9

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.tau0_grid < 2:
            raise ValueError("tau0_grid must be at least 2")
        if not (self.placement == "random" or self.placement.startswith("explicit:")):
            raise ValueError("placement must be 'random' or 'explicit:x,y;x,y;...'")
        if self.sweep_name is not None:
            if self.sweep_name not in SWEEP_FIELDS:
                raise ValueError(f"unknown sweep axis {self.sweep_name!r}; choose from {sorted(SWEEP_FIELDS)}")
            if not (0.0 < self.sweep_min <= self.sweep_max):
                raise ValueError("sweep bounds must be positive and ordered")
            if self.sweep_steps < 1:
                raise ValueError("sweep_steps must be at least 1")

    def solver_config(self) -> GslsConfig:
        return GslsConfig(xi=self.xi)


# Config keys taking a float straight into SystemParams.
_PARAM_KEYS = {
    "p0_watts": "p0",
    "eta": "eta",
    "delta": "delta",
    "l_meters": "l_field",
    "nu_hz": "nu",
    "zeta_pl": "zeta_pl",
    "d_min": "d_min",
}


def load_config(path) -> ScenarioConfig:
    """Parse a line-oriented `key = value` config file.

    `#` starts a comment; blank lines are skipped; unknown keys are errors.
    Noise power is given in dBm and converted to watts here.
    """
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}")
            key, value = (part.strip() for part in text.split("=", 1))
            if key in raw:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value

    params_kwargs = {}
    cfg_kwargs = {}
    for key, value in raw.items():
        if key in _PARAM_KEYS:
            params_kwargs[_PARAM_KEYS[key]] = float(value)
        elif key == "sigma2_dbm":
            params_kwargs["sigma2"] = dbm_to_watts(float(value))
        elif key == "n_su":
            params_kwargs["n_su"] = int(value)
        elif key == "placement":
            cfg_kwargs["placement"] = value
        elif key == "sweep_name":
            cfg_kwargs["sweep_name"] = value
        elif key in ("sweep_min", "sweep_max", "xi"):
            cfg_kwargs[key] = float(value)
        elif key in ("sweep_steps", "trials", "tau0_grid"):
            cfg_kwargs[key] = int(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return ScenarioConfig(params=SystemParams(**params_kwargs), **cfg_kwargs)


def place_nodes(l_field: float, n_su: int, seed: int, d_min: float = 1.0) -> Topology:
    """Drop nodes uniformly on the square, keeping every pair d_min apart.

    The base station sits at the center; the primary pair and then each
    secondary pair draw fresh uniform points, resampling on any clash with
    an already-placed node. Deterministic for a given seed.
    """
    l_field = float(l_field)
    n_su = int(n_su)
    rng = np.random.default_rng(seed)
    placed = [np.array([l_field / 2.0, l_field / 2.0])]

    def draw():
        for _ in range(_PLACEMENT_ATTEMPTS):
            p = rng.uniform(0.0, l_field, 2)
            if all(float(np.hypot(*(p - q))) >= d_min for q in placed):
                placed.append(p)
                return p
        raise ValueError(
            f"could not place a node {d_min} m clear of {len(placed)} others in a {l_field} m square"
        )

    pu_tx = draw()
    pu_rx = draw()
    su_tx = []
    su_rx = []
    for _ in range(n_su):
        su_tx.append(draw())
        su_rx.append(draw())
    return Topology(
        pbs=placed[0],
        pu_tx=pu_tx,
        pu_rx=pu_rx,
        su_tx=np.array(su_tx).reshape(n_su, 2),
        su_rx=np.array(su_rx).reshape(n_su, 2),
    )


def _parse_explicit(text: str, n_su: int) -> Topology:
    body = text[len("explicit:"):]
    points = []
    for chunk in body.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y = chunk.split(",")
        points.append([float(x), float(y)])
    expected = 3 + 2 * n_su
    if len(points) != expected:
        raise ValueError(
            f"explicit placement needs {expected} points "
            f"(pbs; pu_tx; pu_rx; then tx,rx per secondary pair), got {len(points)}"
        )
    pts = np.asarray(points, dtype=float)
    su = pts[3:].reshape(n_su, 2, 2)
    return Topology(pbs=pts[0], pu_tx=pts[1], pu_rx=pts[2], su_tx=su[:, 0], su_rx=su[:, 1])


def topology_for(cfg: ScenarioConfig, seed: int, params: SystemParams | None = None) -> Topology:
    params = params or cfg.params
    if cfg.placement == "random":
        topo = place_nodes(params.l_field, params.n_su, seed, params.d_min)
    else:
        topo = _parse_explicit(cfg.placement, params.n_su)
    topo.validate(params)
    return topo


def run_scenario(cfg: ScenarioConfig, seed: int = 0, params: SystemParams | None = None):
    """Solve one placed instance and score all three schemes under full SNR.

    Returns (proposed, benchmark, uniform) reports. An infeasible floor
    yields a proposed report with tau=None and NaN rates; the baselines are
    still evaluated so the comparison row is never silently dropped.
    """
    params = params or cfg.params
    topo = topology_for(cfg, seed, params)
    gains = gains_from_topology(topo, params)
    gamma = effective_snr_vector(gains, params)

    out = solve(gamma, params.delta, cfg.solver_config())
    if out.tau is None:
        proposed = SchemeReport(scheme="proposed", tau=None, r_sum=math.nan, r1=math.nan, meets_delta=False)
    else:
        proposed = evaluate_scheme(out.tau, gamma, params.delta, scheme="proposed")
    bench = evaluate_scheme(benchmark_ta(gains, params), gamma, params.delta, scheme="benchmark")
    unif = evaluate_scheme(uniform_ta(params.n_su), gamma, params.delta, scheme="uniform")
    return proposed, bench, unif


def fig3_sweep(cfg: ScenarioConfig, tau0_grid: int | None = None, seed: int = 0):
    """One-dimensional charge-time sweep of the placed scenario.

    For each grid point the residual time is split across the data phases in
    proportion to their SNR coefficients, which collapses the problem to a
    single variable. Rows carry (tau0, r_sum, r1, feasible); `feasible` says
    whether that row's own split meets the rate floor, so a floor the full
    solver can still reach by favoring the primary phase may show no
    feasible rows here.
    """
    params = cfg.params
    grid = int(tau0_grid) if tau0_grid is not None else cfg.tau0_grid
    if grid < 2:
        raise ValueError("tau0_grid must be at least 2")
    topo = topology_for(cfg, seed)
    gains = gains_from_topology(topo, params)
    gamma = effective_snr_vector(gains, params)
    share = gamma / gamma.sum()

    rows = []
    for i in range(1, grid + 1):
        tau0 = i / (grid + 1.0)
        tau_rest = (1.0 - tau0) * share
        r1 = throughput(float(gamma[0]), tau0, float(tau_rest[0]))
        tau = np.concatenate([[tau0], tau_rest])
        rows.append({
            "tau0": tau0,
            "r_sum": sum_throughput(gamma, tau),
            "r1": r1,
            "feasible": bool(r1 >= params.delta),
        })
    return rows


def _mean(values):
    return math.fsum(values) / len(values)


def sweep(cfg: ScenarioConfig, seed: int = 0, with_trials: bool = False):
    """Run the configured parameter sweep.

    Per sweep value, `trials` seeded placements are solved and all three
    schemes scored. Returns one aggregate row per (value, scheme); pass
    with_trials=True to also get the per-trial rows (the CSV carries both,
    aggregates labeled trial="mean"). Trial t always uses placement seed
    seed+t, so different sweep values see coupled layouts.
    """
    if cfg.sweep_name is None:
        raise ValueError("config has no sweep_name; nothing to sweep")
    field_name = SWEEP_FIELDS[cfg.sweep_name]
    values = np.linspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_steps)

    trial_rows = []
    mean_rows = []
    for value in values:
        if cfg.sweep_name == "N":
            if abs(value - round(value)) > 1e-9:
                raise ValueError("N sweep values must be integers")
            value = int(round(value))
            if cfg.placement != "random":
                raise ValueError("sweeping N needs random placement (node count changes)")
        else:
            value = float(value)
        params_v = dataclasses.replace(cfg.params, **{field_name: value})
        per_scheme = {"proposed": [], "benchmark": [], "uniform": []}
        for trial in range(cfg.trials):
            reports = run_scenario(cfg, seed=seed + trial, params=params_v)
            for rep in reports:
                trial_rows.append({
                    "sweep_name": cfg.sweep_name,
                    "sweep_value": value,
                    "trial": trial,
                    "scheme": rep.scheme,
                    "r_sum": rep.r_sum,
                    "r1": rep.r1,
                    "meets_delta": rep.meets_delta,
                })
                per_scheme[rep.scheme].append(rep)
        for scheme, reps in per_scheme.items():
            mean_rows.append({
                "sweep_name": cfg.sweep_name,
                "sweep_value": value,
                "trial": "mean",
                "scheme": scheme,
                "r_sum": _mean([r.r_sum for r in reps]),
                "r1": _mean([r.r1 for r in reps]),
                "meets_delta": all(r.meets_delta for r in reps),
            })
    if with_trials:
        return trial_rows, mean_rows
    return mean_rows


def improvement_summary(rows) -> dict:
    """Mean percentage gain of the proposed scheme over each baseline.

    Works on aggregate sweep rows; sweep points where the proposed scheme
    was infeasible (NaN) are skipped, and having no usable point is an error.
    """
    by_value: dict = {}
    for row in rows:
        by_value.setdefault(row["sweep_value"], {})[row["scheme"]] = row["r_sum"]
    gains = {"benchmark": [], "uniform": []}
    for value, schemes in sorted(by_value.items()):
        prop = schemes.get("proposed")
        if prop is None or math.isnan(prop):
            continue
        for base in gains:
            ref = schemes.get(base)
            if ref is None or math.isnan(ref) or ref <= 0.0:
                continue
            gains[base].append((prop - ref) / ref * 100.0)
    if not any(gains.values()):
        raise ValueError("no sweep point had a feasible proposed solution to compare")
    return {base: _mean(vals) for base, vals in gains.items() if vals}

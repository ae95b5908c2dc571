"""Parameter sweeps behind the CLI subcommands.

Every sweep point or robustness trial is an independent task. Tasks run in a
process pool when ``workers > 1`` and their rows are sorted by the sweep keys
before being returned, so the output does not depend on the worker count.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DissprepError, MemoryBudgetExceededError
from ..liouvillian import total_liouvillian
from ..metrics import evaluate, fidelity, mode_occupations, pair_concurrence, purity
from ..model import ChainSpec, NoiseSpec, Polarization, ReservoirSpec, xy_mode_frequencies
from ..operators import jw_mode_operators, ket_to_dm, mode_excitation_state, vacuum_state
from ..solvers import evolve, relative_residual, steady_state
from .config import ExperimentConfig

METRIC_COLUMNS = [
    "fidelity",
    "purity",
    "concurrence_i",
    "concurrence_j",
    "concurrence",
    "mode_occupations",
    "residual",
]


@dataclass
class SweepResult:
    kind: str
    columns: list[str]
    rows: list[dict]
    header: dict = field(default_factory=dict)

    @property
    def failed(self) -> int:
        return sum(1 for r in self.rows if r.get("status") != "ok")

    def column(self, name: str, **where) -> list:
        return [
            r[name] for r in self.rows if all(r.get(k) == v for k, v in where.items())
        ]


def reservoir_modes(spec: ChainSpec, target_mode: int, count: int) -> list[int]:
    """Target mode followed by the ``count - 1`` modes spectrally closest to it.

    Ties are broken towards the lower mode index.
    """
    if count == 0:
        return []
    freqs = xy_mode_frequencies(spec)
    scale = max(np.abs(freqs).max(), 1e-300)
    others = sorted(
        (k for k in range(1, spec.N + 1) if k != target_mode),
        # rounding relative to the bandwidth makes symmetric pairs tie exactly
        key=lambda k: (round(abs(freqs[k - 1] - freqs[target_mode - 1]) / scale, 9), k),
    )
    return [target_mode] + others[: count - 1]


def resolve_point(cfg: ExperimentConfig, point: dict, factors=None):
    """Concrete chain, reservoirs and noise for one sweep point.

    ``factors`` optionally rescales each reservoir rate (robustness trials).
    """
    N = int(point.get("N", cfg.chain.N))
    spec = ChainSpec(N, cfg.chain.J)
    kappa = cfg.noise.kappa
    noise = NoiseSpec(
        kappa=kappa,
        kappa_phi=point.get("kappa_phi", cfg.noise.kappa_phi) * kappa,
        nbar=point.get("nbar", cfg.noise.nbar),
    )
    g_sweep = point.get("gamma_over_kappa")
    if cfg.reservoir_plan is not None:
        plan = [
            (e.mode_index, e.polarization, g_sweep if g_sweep is not None else e.gamma_over_kappa)
            for e in cfg.reservoir_plan
        ]
    else:
        count = point.get("reservoir_count", cfg.reservoir_count)
        count = N if count == "all" else int(count)
        g = cfg.gamma_over_kappa if g_sweep is None else g_sweep
        plan = [
            (k, Polarization.EXCITED if k == cfg.target_mode else Polarization.GROUND, g)
            for k in reservoir_modes(spec, cfg.target_mode, count)
        ]
    factors = np.ones(len(plan)) if factors is None else factors
    reservoirs = [
        ReservoirSpec(mode, pol, g * kappa * f) for (mode, pol, g), f in zip(plan, factors)
    ]
    return spec, reservoirs, noise


def describe_reservoirs(reservoirs) -> str:
    return " ".join(
        f"{r.mode_index}{'+' if r.polarization is Polarization.EXCITED else '-'}"
        for r in reservoirs
    )


def sweep_points(cfg: ExperimentConfig) -> list[dict]:
    names = list(cfg.sweep)
    return [dict(zip(names, combo)) for combo in itertools.product(*cfg.sweep.values())]


def _sort_key(row: dict, keys):
    return tuple(-1 if row[k] == "all" else row[k] for k in keys)


def _run_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _failed_metrics(exc: Exception) -> dict:
    row = {c: math.nan for c in METRIC_COLUMNS}
    row["mode_occupations"] = ""
    row["status"] = f"failed:{type(exc).__name__}"
    return row


def _steady_task(task) -> dict:
    cfg, point = task
    start = time.perf_counter()
    spec, reservoirs, noise = resolve_point(cfg, point)
    i, j = cfg.concurrence_pair
    row = dict(point)
    row["seed"] = -1
    try:
        L = total_liouvillian(spec, reservoirs, noise, cfg.frame)
        rho = steady_state(L, cfg.solver)
        residual = relative_residual(L, rho)
        if not residual <= cfg.solver.residual_tol:
            raise DissprepError(f"residual {residual:.3e} above tolerance")
        target = mode_excitation_state(spec, cfg.target_mode)
        pair = (i, j) if max(i, j) <= spec.N else None
        record = evaluate(rho, target, spec, pair=pair or (1, 2), residual=residual)
        row.update(
            fidelity=record.fidelity,
            purity=record.purity,
            concurrence_i=i,
            concurrence_j=j,
            concurrence=record.concurrence if pair else math.nan,
            mode_occupations=";".join(f"{x:.12g}" for x in record.mode_occupations),
            residual=residual,
            status="ok",
        )
    except DissprepError as exc:
        row.update(_failed_metrics(exc), concurrence_i=i, concurrence_j=j)
    row["reservoirs"] = describe_reservoirs(reservoirs)
    row["wall_time_seconds"] = time.perf_counter() - start
    return row


def run_steady_sweep(cfg: ExperimentConfig, workers: int = 1, kind: str = "steady") -> SweepResult:
    """Steady-state metrics at every point of the configured sweep."""
    check_budget(cfg)
    keys = list(cfg.sweep)
    rows = _run_tasks(_steady_task, [(cfg, p) for p in sweep_points(cfg)], workers)
    rows.sort(key=lambda r: _sort_key(r, keys))
    columns = keys + ["seed"] + METRIC_COLUMNS + ["status", "reservoirs", "wall_time_seconds"]
    reservoir_sets = {}
    for r in rows:
        label = ",".join(f"{k}={r[k]}" for k in keys) or "single"
        reservoir_sets[label] = r["reservoirs"]
    return SweepResult(kind, columns, rows, {"reservoir_sets": reservoir_sets})


def check_budget(cfg: ExperimentConfig) -> None:
    for N in cfg.sweep.get("N", [cfg.chain.N]):
        if N > cfg.max_sites:
            raise MemoryBudgetExceededError(
                f"N = {N} exceeds the configured cap of {cfg.max_sites} sites"
            )


def run_panel_a(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Fidelity of a pump-only reservoir versus rate and temperature."""
    return run_steady_sweep(cfg, workers, kind="panel-a")


def run_panel_b_c_d(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Fidelity, purity and pair concurrence versus reservoir count and rate."""
    return run_steady_sweep(cfg, workers, kind="panel-bcd")


def run_scaling(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Steady fidelity and purity of ``f_1^dag |0>_N`` versus chain length."""
    return run_steady_sweep(cfg, workers, kind="scaling")


def nominal_gamma(cfg: ExperimentConfig) -> float:
    if cfg.reservoir_plan is not None and cfg.reservoir_plan:
        g = max(e.gamma_over_kappa for e in cfg.reservoir_plan)
    else:
        g = cfg.gamma_over_kappa
    return g * cfg.noise.kappa


def scaled_time_grid(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Scaled times ``tau = gamma t`` and the matching physical times."""
    gamma = nominal_gamma(cfg)
    if gamma <= 0:
        raise DissprepError("time grid is scaled by gamma, which must be > 0")
    tau = np.linspace(0.0, cfg.time_grid["scaled_max"], cfg.time_grid["points"])
    return tau, tau / gamma


def trial_factors(seed: int, trial: int, percent: float, count: int) -> np.ndarray:
    """Static multiplicative rate perturbations for one robustness trial.

    Draws depend only on ``(seed, trial)``, so every percentage level reuses
    the same uniform variates and parallel execution cannot change them.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
    return 1.0 + percent * rng.uniform(-1.0, 1.0, size=count)


def _trajectory(cfg: ExperimentConfig, point: dict, factors=None):
    spec, reservoirs, noise = resolve_point(cfg, point, factors)
    L = total_liouvillian(spec, reservoirs, noise, cfg.frame)
    tau, t = scaled_time_grid(cfg)
    states = evolve(L, ket_to_dm(vacuum_state(spec.N)), t, cfg.solver)
    return spec, tau, t, states


def _robustness_task(task) -> list[dict]:
    cfg, percent, trial = task
    start = time.perf_counter()
    spec0, reservoirs0, _ = resolve_point(cfg, {})
    factors = trial_factors(cfg.robustness.seed, trial, percent, len(reservoirs0))
    base = {"percent": percent, "trial": trial, "seed": cfg.robustness.seed}
    try:
        spec, tau, t, states = _trajectory(cfg, {}, factors)
        target = mode_excitation_state(spec, cfg.target_mode)
        rows = [
            {**base, "tau": a, "t": b, "fidelity": fidelity(rho, target),
             "purity": purity(rho), "status": "ok"}
            for a, b, rho in zip(tau, t, states)
        ]
    except DissprepError as exc:
        tau, t = scaled_time_grid(cfg)
        status = f"failed:{type(exc).__name__}"
        rows = [
            {**base, "tau": a, "t": b, "fidelity": math.nan, "purity": math.nan, "status": status}
            for a, b in zip(tau, t)
        ]
    elapsed = time.perf_counter() - start
    for r in rows:
        r["rate_factors"] = ";".join(f"{f:.12g}" for f in factors)
        r["wall_time_seconds"] = elapsed
    return rows


def run_robustness(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Fidelity and purity trajectories under static random rate errors.

    A zero-perturbation baseline is always included. Rows with ``trial = -1``
    hold the per-time trial means of each percentage level.
    """
    if cfg.robustness is None:
        raise DissprepError("robustness block missing from config")
    check_budget(cfg)
    rob = cfg.robustness
    levels = sorted(set(rob.percent) | {0.0})
    tasks = []
    for p in levels:
        trials = range(rob.trials) if p > 0 or 0.0 in rob.percent else range(1)
        tasks.extend((cfg, p, trial) for trial in trials)
    rows = [r for chunk in _run_tasks(_robustness_task, tasks, workers) for r in chunk]
    rows.sort(key=lambda r: (r["percent"], r["trial"], r["tau"]))

    means = []
    for p in levels:
        block = [r for r in rows if r["percent"] == p]
        for tau in sorted({r["tau"] for r in block}):
            at = [r for r in block if r["tau"] == tau]
            ok = [r for r in at if r["status"] == "ok"]
            means.append({
                "percent": p, "trial": -1, "seed": -1, "tau": tau, "t": at[0]["t"],
                "fidelity": float(np.mean([r["fidelity"] for r in ok])) if ok else math.nan,
                "purity": float(np.mean([r["purity"] for r in ok])) if ok else math.nan,
                "status": "ok" if len(ok) == len(at) else "failed:trial",
                "rate_factors": "",
                "wall_time_seconds": 0.0,
            })
    columns = ["percent", "trial", "seed", "tau", "t", "fidelity", "purity", "status",
               "rate_factors", "wall_time_seconds"]
    _, reservoirs, _ = resolve_point(cfg, {})
    header = {"reservoirs": describe_reservoirs(reservoirs), "time_scale": "tau = gamma * t"}
    return SweepResult("robustness", columns, rows + means, header)


def late_time_means(result: SweepResult) -> dict[float, float]:
    """Trial-mean fidelity at the last grid time for each percentage level."""
    out = {}
    for r in result.rows:
        if r["trial"] == -1:
            out[r["percent"]] = r["fidelity"]  # rows are time-ordered; last wins
    return out


def run_evolution(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Single trajectory from the all-down state on the scaled time grid."""
    check_budget(cfg)
    start = time.perf_counter()
    spec, reservoirs, _ = resolve_point(cfg, {})
    i, j = cfg.concurrence_pair
    rows = []
    try:
        spec, tau, t, states = _trajectory(cfg, {})
        target = mode_excitation_state(spec, cfg.target_mode)
        modes = jw_mode_operators(spec)
        for a, b, rho in zip(tau, t, states):
            occ = mode_occupations(rho, spec, modes)
            rows.append({
                "tau": a, "t": b, "seed": -1,
                "fidelity": fidelity(rho, target), "purity": purity(rho),
                "concurrence_i": i, "concurrence_j": j,
                "concurrence": pair_concurrence(rho, i, j) if max(i, j) <= spec.N else math.nan,
                "mode_occupations": ";".join(f"{x:.12g}" for x in occ),
                "residual": math.nan, "status": "ok",
            })
    except DissprepError as exc:
        tau, t = scaled_time_grid(cfg)
        rows = [{"tau": a, "t": b, "seed": -1, **_failed_metrics(exc),
                 "concurrence_i": i, "concurrence_j": j} for a, b in zip(tau, t)]
    elapsed = time.perf_counter() - start
    for r in rows:
        r["reservoirs"] = describe_reservoirs(reservoirs)
        r["wall_time_seconds"] = elapsed
    columns = ["tau", "t", "seed"] + METRIC_COLUMNS + ["status", "reservoirs", "wall_time_seconds"]
    return SweepResult("evolve", columns, rows, {"time_scale": "tau = gamma * t"})

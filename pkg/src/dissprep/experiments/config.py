"""Declarative experiment configuration.

A config is a JSON object whose keys mirror :class:`ExperimentConfig`. Keys
missing from the file fall back to the preset of the chosen subcommand;
unknown keys are rejected. All rates are in units of ``kappa`` (which is 1
unless overridden), and ``J`` defaults to ``1000 kappa`` so the chain
spectrum is well resolved compared with every dissipative rate.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..liouvillian import Frame
from ..model import ChainSpec, NoiseSpec, Polarization, check_mode_index
from ..solvers import SolverOptions

SWEEP_PARAMETERS = ("N", "reservoir_count", "gamma_over_kappa", "nbar", "kappa_phi")
DEFAULT_MAX_SITES = 8


def _log_grid(lo_exp, hi_exp, points):
    return [float(f"{x:.12g}") for x in np.logspace(lo_exp, hi_exp, points)]


_BASE = {
    "chain": {"N": 5, "J": 1000.0},
    "noise": {"kappa": 1.0, "kappa_phi": 1.0, "nbar": 0.001},
    "target_mode": 1,
    "gamma_over_kappa": 100.0,
    "reservoir_count": "all",
    "reservoir_plan": None,
    "frame": "lab",
    "sweep": {},
    "robustness": None,
    "time_grid": {"scaled_max": 10.0, "points": 200},
    "solver": {
        "method": "auto",
        "residual_tol": 1e-10,
        "ode_rel_tol": 1e-8,
        "ode_abs_tol": 1e-10,
        "max_time": None,
        "convergence_tol": 1e-9,
        "max_direct_dim": 4**6,
    },
    "concurrence_pair": [2, 3],
    "max_sites": DEFAULT_MAX_SITES,
    "output_path": None,
}

PRESETS = {
    "steady": {},
    "evolve": {},
    "panel-a": {
        "noise": {"kappa_phi": 0.0},
        "reservoir_count": 1,
        "sweep": {
            "nbar": [0.001, 0.01, 0.1, 0.5],
            "gamma_over_kappa": _log_grid(0, 3, 13),
        },
    },
    "panel-bcd": {
        "sweep": {
            "reservoir_count": [1, 2, 3, 4, 5],
            "gamma_over_kappa": _log_grid(0, 3, 13),
        },
    },
    "robustness": {
        "robustness": {"percent": [0.1, 0.2, 0.3], "trials": 20, "seed": 0},
    },
    "scaling": {
        "sweep": {"N": [2, 3, 4, 5, 6, 7]},
    },
}


@dataclass(frozen=True)
class ReservoirPlanEntry:
    mode_index: int
    polarization: Polarization
    gamma_over_kappa: float


@dataclass(frozen=True)
class RobustnessSpec:
    percent: tuple[float, ...]
    trials: int = 20
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    chain: ChainSpec
    noise: NoiseSpec
    target_mode: int = 1
    gamma_over_kappa: float = 100.0
    reservoir_count: int | str | None = "all"
    reservoir_plan: tuple[ReservoirPlanEntry, ...] | None = None
    frame: Frame = Frame.LAB
    sweep: dict = field(default_factory=dict)
    robustness: RobustnessSpec | None = None
    time_grid: dict = field(default_factory=lambda: {"scaled_max": 10.0, "points": 200})
    solver: SolverOptions = field(default_factory=SolverOptions)
    concurrence_pair: tuple[int, int] = (2, 3)
    max_sites: int = DEFAULT_MAX_SITES
    output_path: str | None = None

    def to_json_dict(self) -> dict:
        """Plain-JSON echo of the resolved configuration."""
        out = asdict(self)
        out["frame"] = self.frame.value
        out["solver"]["method"] = self.solver.method.value
        if self.reservoir_plan is not None:
            out["reservoir_plan"] = [
                {**asdict(e), "polarization": e.polarization.value} for e in self.reservoir_plan
            ]
        out["concurrence_pair"] = list(self.concurrence_pair)
        if self.robustness is not None:
            out["robustness"]["percent"] = list(self.robustness.percent)
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        # sweep replaces wholesale; other dicts merge key by key
        if isinstance(base[key], dict) and isinstance(value, dict) and key != "sweep":
            out[key] = _merge(base[key], value, where + ".")
        elif isinstance(value, dict) and key == "robustness":
            out[key] = _merge({"percent": [0.1, 0.2, 0.3], "trials": 20, "seed": 0}, value, where + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def _parse_plan(raw) -> tuple[ReservoirPlanEntry, ...]:
    entries = []
    for i, item in enumerate(raw):
        if isinstance(item, dict):
            unknown = set(item) - {"mode_index", "polarization", "gamma_over_kappa"}
            if unknown:
                raise ConfigError(f"reservoir_plan[{i}]: unknown keys {sorted(unknown)}")
            try:
                mode, pol, g = item["mode_index"], item["polarization"], item["gamma_over_kappa"]
            except KeyError as exc:
                raise ConfigError(f"reservoir_plan[{i}] missing {exc}") from None
        else:
            try:
                mode, pol, g = item
            except (TypeError, ValueError):
                raise ConfigError(f"reservoir_plan[{i}] must be a mapping or triple") from None
        try:
            entries.append(ReservoirPlanEntry(int(mode), Polarization.parse(pol), float(g)))
        except ValueError as exc:
            raise ConfigError(f"reservoir_plan[{i}]: {exc}") from None
        if entries[-1].gamma_over_kappa < 0:
            raise ConfigError(f"reservoir_plan[{i}]: negative gamma_over_kappa")
    return tuple(entries)


def build_config(raw: dict | None = None, preset: str = "steady") -> ExperimentConfig:
    """Merge ``raw`` over ``preset`` and validate the result."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    merged = _merge(_BASE, PRESETS[preset])
    merged = _merge(merged, raw or {})
    try:
        return _from_dict(merged)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def _from_dict(d: dict) -> ExperimentConfig:
    chain = ChainSpec(int(d["chain"]["N"]), float(d["chain"]["J"]))
    noise = NoiseSpec(**{k: float(v) for k, v in d["noise"].items()})

    sweep = {}
    for name, values in d["sweep"].items():
        if name not in SWEEP_PARAMETERS:
            raise ConfigError(f"cannot sweep {name!r}; choose from {SWEEP_PARAMETERS}")
        values = list(values)
        if not values:
            raise ConfigError(f"sweep grid for {name!r} is empty")
        if name in ("N", "reservoir_count"):
            values = [v if v == "all" else int(v) for v in values]
        else:
            values = [float(v) for v in values]
        sweep[name] = values

    count = d["reservoir_count"]
    if count is not None and count != "all":
        count = int(count)
    plan = None if d["reservoir_plan"] is None else _parse_plan(d["reservoir_plan"])
    if plan is not None and "reservoir_count" in sweep:
        raise ConfigError("reservoir_plan cannot be combined with a reservoir_count sweep")
    if plan is not None:
        count = None

    rob = None
    if d["robustness"] is not None:
        r = d["robustness"]
        percent = r["percent"]
        percent = tuple(float(p) for p in (percent if isinstance(percent, list) else [percent]))
        if not percent or any(not 0 <= p < 1 for p in percent):
            raise ConfigError("robustness.percent values must lie in [0, 1)")
        if int(r["trials"]) < 1:
            raise ConfigError("robustness.trials must be >= 1")
        rob = RobustnessSpec(percent, int(r["trials"]), int(r["seed"]))

    tg = d["time_grid"]
    unknown = set(tg) - {"scaled_max", "points"}
    if unknown:
        raise ConfigError(f"unknown time_grid keys {sorted(unknown)}")
    if not float(tg["scaled_max"]) > 0 or int(tg["points"]) < 2:
        raise ConfigError("time_grid needs scaled_max > 0 and points >= 2")

    pair = tuple(int(x) for x in d["concurrence_pair"])
    if len(pair) != 2 or pair[0] == pair[1]:
        raise ConfigError("concurrence_pair must name two distinct sites")

    cfg = ExperimentConfig(
        chain=chain,
        noise=noise,
        target_mode=int(d["target_mode"]),
        gamma_over_kappa=float(d["gamma_over_kappa"]),
        reservoir_count=count,
        reservoir_plan=plan,
        frame=Frame(d["frame"]),
        sweep=sweep,
        robustness=rob,
        time_grid={"scaled_max": float(tg["scaled_max"]), "points": int(tg["points"])},
        solver=SolverOptions(**d["solver"]),
        concurrence_pair=pair,
        max_sites=int(d["max_sites"]),
        output_path=d["output_path"],
    )
    counts = sweep.get("reservoir_count", [count])
    for N in sweep.get("N", [chain.N]):
        try:
            check_mode_index(ChainSpec(N, chain.J), cfg.target_mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for c in counts:
            if isinstance(c, int) and not 0 <= c <= N:
                raise ConfigError(f"reservoir_count {c} impossible on a chain of {N} sites")
        if plan is not None:
            for entry in plan:
                if not 1 <= entry.mode_index <= N:
                    raise ConfigError(f"reservoir_plan mode {entry.mode_index} outside [1, {N}]")
    return cfg


def load_config(path: str | Path | None, preset: str) -> ExperimentConfig:
    if path is None:
        return build_config({}, preset)
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return build_config(raw, preset)

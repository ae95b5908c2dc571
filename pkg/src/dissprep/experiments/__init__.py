"""Sweeps, CSV output, figures and the command-line interface."""

from .config import ExperimentConfig, build_config, load_config
from .sweeps import (
    SweepResult,
    reservoir_modes,
    run_evolution,
    run_panel_a,
    run_panel_b_c_d,
    run_robustness,
    run_scaling,
    run_steady_sweep,
)

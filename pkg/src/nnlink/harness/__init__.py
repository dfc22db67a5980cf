"""Experiment driver: sweeps, figure pipelines, persistence and the CLI."""

from .figures import (
    ExperimentConfig,
    FigureReport,
    paired_ser,
    reproduce_fig1,
    reproduce_fig2,
    reproduce_fig3,
    run_figure,
)
from .io import parse_config_text, read_config, records_csv, render_csv
from .persistence import FORMAT_VERSION, load_model, save_model
from .sweep import SweepSpec, mc_sweep, snr_grid

__all__ = [
    "ExperimentConfig",
    "FigureReport",
    "FORMAT_VERSION",
    "SweepSpec",
    "load_model",
    "mc_sweep",
    "paired_ser",
    "parse_config_text",
    "read_config",
    "records_csv",
    "render_csv",
    "reproduce_fig1",
    "reproduce_fig2",
    "reproduce_fig3",
    "run_figure",
    "save_model",
    "snr_grid",
]

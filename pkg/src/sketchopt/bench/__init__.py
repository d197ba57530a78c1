"""Reproducible benchmark harness: configs, datasets, runners, CLI, SVG."""

from .config import BenchError, ExperimentConfig, parse_config
from .datasets import (load_dataset, materialize_dataset, parse_dataset_spec,
                       synth_planted)
from .runners import run_lpreg, run_optimize, run_scores, run_vmv
from .svg import polyline_svg
from .cli import main

__all__ = [
    "BenchError",
    "ExperimentConfig",
    "parse_config",
    "load_dataset",
    "materialize_dataset",
    "parse_dataset_spec",
    "synth_planted",
    "run_optimize",
    "run_lpreg",
    "run_vmv",
    "run_scores",
    "polyline_svg",
    "main",
]

"""Evaluation layer: image I/O, metrics, experiments and the command-line interface."""

from .experiment import (CSV_COLUMNS, PROFILES, ExperimentConfig, compare_estimators, load_config,
                         parse_config_text, run_experiment)
from .imageio import ingest_image, read_pgm, write_pgm
from .metrics import PSNR_CAP, psnr, residual_histogram

__all__ = [
    "CSV_COLUMNS", "PROFILES", "PSNR_CAP", "ExperimentConfig", "compare_estimators", "ingest_image",
    "load_config", "parse_config_text", "psnr", "read_pgm", "residual_histogram", "run_experiment",
    "write_pgm",
]

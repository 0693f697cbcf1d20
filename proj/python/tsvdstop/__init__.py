"""Residual-based early stopping for truncated SVD estimators."""

import json as _json

from ._core import (
    ConfigError,
    InvalidArgument,
    MissingNoise,
    NumericError,
    TruncatedStream,
    TsvdError,
    calibrate,
    counterexample,
    early_stop,
    oracles,
    polynomial_spectrum,
    sequential_solve,
    simulate,
    theory_bounds,
    tv_bound,
    tv_numeric,
    two_step,
)
from ._core import run_experiment as _run_experiment

__all__ = [
    "ConfigError",
    "InvalidArgument",
    "MissingNoise",
    "NumericError",
    "TruncatedStream",
    "TsvdError",
    "calibrate",
    "counterexample",
    "early_stop",
    "oracles",
    "polynomial_spectrum",
    "run_experiment",
    "sequential_solve",
    "simulate",
    "theory_bounds",
    "tv_bound",
    "tv_numeric",
    "two_step",
]


def run_experiment(config, threads=0):
    """Run a Monte Carlo experiment; config is a dict following docs/config.md.

    Returns (report, csv_text).
    """
    return _run_experiment(_json.dumps(config), threads)

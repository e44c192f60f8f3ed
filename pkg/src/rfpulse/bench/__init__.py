"""Benchmark harness: calibration-experiment templates, curve fits, the
ideal-time baseline and sweep-scaling reports."""

from rfpulse.bench.client import ServerReplyError, send_request
from rfpulse.bench.fits import FitError, FitResult, fit_model
from rfpulse.bench.harness import (
    ExperimentData,
    ScalingRow,
    ideal_time,
    principal_projection,
    read_scaling_csv,
    run_experiment,
    scaling_report,
    write_scaling_csv,
)
from rfpulse.bench.templates import (
    ExperimentKind,
    default_params,
    experiment_requests,
    point_durations,
    sweep_axis,
    sweep_points,
)

__all__ = [
    "ExperimentKind",
    "ExperimentData",
    "ScalingRow",
    "FitError",
    "FitResult",
    "ServerReplyError",
    "default_params",
    "experiment_requests",
    "fit_model",
    "ideal_time",
    "point_durations",
    "principal_projection",
    "read_scaling_csv",
    "run_experiment",
    "scaling_report",
    "send_request",
    "sweep_axis",
    "sweep_points",
    "write_scaling_csv",
]

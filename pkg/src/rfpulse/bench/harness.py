"""Experiment execution against a live server plus scaling analysis.

Wall times in scaling reports come from the affine overhead model, not from
wall-clock sleeps, so reports are deterministic for a seeded server and
desk-scale runs finish in seconds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rfpulse.backend_sim import OverheadModel, simulated_wall_time
from rfpulse.bench.client import ServerReplyError, send_request
from rfpulse.bench.templates import (
    PER_POINT_KINDS,
    RTS_KINDS,
    ExperimentKind,
    default_params,
    experiment_requests,
    point_durations,
    sweep_axis,
)

__all__ = [
    "ExperimentData",
    "ScalingRow",
    "ideal_time",
    "run_experiment",
    "scaling_report",
    "principal_projection",
    "write_scaling_csv",
    "read_scaling_csv",
    "emit_scaling_plot",
]


def ideal_time(n_shots: int, sequence_durations, relaxation: float) -> float:
    """Minimum qubit-occupancy time: shots times the summed per-point cost."""
    total = 0.0
    for duration in sequence_durations:
        total += duration + relaxation
    return n_shots * total


@dataclass
class ExperimentData:
    """One executed experiment: swept values, IQ data and cost accounting."""

    kind: ExperimentKind
    x: object  # array of swept values; (biases, frequencies) for flux maps
    i: np.ndarray
    q: np.ndarray
    sequence_durations: list[float]
    n_connections: int
    n_program_loads: int
    shots: int
    relaxation: float
    params: dict = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.i, self.q)


@dataclass(frozen=True)
class ScalingRow:
    kind: str
    points: int
    wall: float  # s
    ideal: float  # s
    ratio: float


def run_experiment(
    kind: ExperimentKind,
    host: str,
    port: int,
    params: dict | None = None,
    timeout: float = 120.0,
) -> ExperimentData:
    """Build the template requests, execute them in order, assemble the data."""
    kind = ExperimentKind(kind)
    merged = default_params(kind)
    if params:
        merged.update(params)
    requests = experiment_requests(kind, merged)
    durations = point_durations(kind, merged, requests)
    x = sweep_axis(kind, merged)

    if kind in RTS_KINDS:
        result = send_request(host, port, requests[0], timeout=timeout)
        i = np.asarray(result.i[0], dtype=float)
        q = np.asarray(result.q[0], dtype=float)
        if kind is ExperimentKind.FLUX_MAP:
            biases, frequencies = x
            i = i.reshape(len(biases), len(frequencies))
            q = q.reshape(len(biases), len(frequencies))
        n_connections = n_loads = 1
    elif kind in PER_POINT_KINDS:
        i_points = []
        q_points = []
        for index, request in enumerate(requests):
            try:
                result = send_request(host, port, request, timeout=timeout)
            except ServerReplyError as exc:
                raise ServerReplyError(f"point {index}: {exc}") from exc
            i_points.append(result.i[0])
            q_points.append(result.q[0])
        i = np.asarray(i_points, dtype=float)
        q = np.asarray(q_points, dtype=float)
        n_connections = n_loads = len(requests)
    else:  # singleshot: ground then excited preparation, no averaging
        clouds_i = []
        clouds_q = []
        for index, request in enumerate(requests):
            try:
                result = send_request(host, port, request, timeout=timeout)
            except ServerReplyError as exc:
                raise ServerReplyError(f"point {index}: {exc}") from exc
            clouds_i.append(result.i[0])
            clouds_q.append(result.q[0])
        i = np.asarray(clouds_i, dtype=float)
        q = np.asarray(clouds_q, dtype=float)
        n_connections = n_loads = len(requests)

    return ExperimentData(
        kind=kind,
        x=x,
        i=i,
        q=q,
        sequence_durations=durations,
        n_connections=n_connections,
        n_program_loads=n_loads,
        shots=int(merged["reps"]),
        relaxation=float(merged["relaxation"]),
        params=merged,
    )


def scaling_report(
    kind: ExperimentKind,
    point_counts,
    host: str,
    port: int,
    shots: int = 4096,
    relaxation: float = 5e-6,
    overheads: OverheadModel | None = None,
    params: dict | None = None,
    out_csv: str | Path | None = None,
    timeout: float = 600.0,
) -> list[ScalingRow]:
    """Run the template at each point count and derive wall/ideal/ratio rows."""
    kind = ExperimentKind(kind)
    overheads = overheads if overheads is not None else OverheadModel()
    rows: list[ScalingRow] = []
    for points in point_counts:
        overrides = dict(params or {})
        overrides["points"] = int(points)
        overrides["reps"] = int(shots)
        overrides["relaxation"] = float(relaxation)
        data = run_experiment(kind, host, port, overrides, timeout=timeout)
        ideal = ideal_time(shots, data.sequence_durations, relaxation)
        wall = simulated_wall_time(
            data.n_program_loads, data.n_connections, ideal, overheads
        )
        rows.append(
            ScalingRow(
                kind=kind.value,
                points=int(points),
                wall=wall,
                ideal=ideal,
                ratio=wall / ideal,
            )
        )
    if out_csv is not None:
        write_scaling_csv(rows, out_csv)
    return rows


def write_scaling_csv(rows, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["kind", "points", "wall_s", "ideal_s", "ratio"])
        for row in rows:
            writer.writerow(
                [row.kind, row.points, repr(row.wall), repr(row.ideal), repr(row.ratio)]
            )


def read_scaling_csv(path: str | Path) -> list[ScalingRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        for record in csv.DictReader(handle):
            rows.append(
                ScalingRow(
                    kind=record["kind"],
                    points=int(record["points"]),
                    wall=float(record["wall_s"]),
                    ideal=float(record["ideal_s"]),
                    ratio=float(record["ratio"]),
                )
            )
    return rows


def principal_projection(i, q) -> np.ndarray:
    """Project IQ points onto their principal axis.

    Removes the arbitrary overall rotation from the converter clock phase, so
    one-dimensional fits see the full signal contrast regardless of seed.
    """
    points = np.stack([np.asarray(i, float).ravel(), np.asarray(q, float).ravel()])
    centered = points - points.mean(axis=1, keepdims=True)
    covariance = centered @ centered.T
    _eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    axis = eigenvectors[:, -1]  # largest-eigenvalue direction
    return (axis @ centered).reshape(np.asarray(i).shape)


def emit_scaling_plot(rows_by_kind: dict[str, list[ScalingRow]], path: str | Path) -> None:
    """Line charts of wall/ideal and ratio versus point count (file output)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_time, ax_ratio) = plt.subplots(1, 2, figsize=(10, 4))
    for kind, rows in rows_by_kind.items():
        points = [row.points for row in rows]
        ax_time.plot(points, [row.wall for row in rows], marker="o", label=f"{kind} wall")
        ax_time.plot(points, [row.ideal for row in rows], marker=".", linestyle="--",
                     label=f"{kind} ideal")
        ax_ratio.plot(points, [row.ratio for row in rows], marker="o", label=kind)
    for ax in (ax_time, ax_ratio):
        ax.set_xscale("log")
        ax.set_xlabel("points")
        ax.legend(fontsize=8)
    ax_time.set_yscale("log")
    ax_time.set_ylabel("time [s]")
    ax_ratio.set_ylabel("wall / ideal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

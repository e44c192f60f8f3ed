"""Command-line entry points: the experiment server and the benchmark harness."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from rfpulse.backend_sim import BOARD_PROFILES, OverheadModel
from rfpulse.bench import (
    ExperimentKind,
    ideal_time,
    run_experiment,
    scaling_report,
    write_scaling_csv,
)
from rfpulse.bench.harness import emit_scaling_plot
from rfpulse.server import ServerConfig, ServerError
from rfpulse.server import serve as run_server

_KINDS = [kind.value for kind in ExperimentKind]


def _parse_bind(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise click.BadParameter(f"expected HOST:PORT, got '{value}'")
    return host, int(port)


def _parse_overrides(pairs: tuple[str, ...]) -> dict:
    overrides = {}
    for pair in pairs:
        key, _, raw = pair.partition("=")
        if not _ or not key:
            raise click.BadParameter(f"expected KEY=VALUE, got '{pair}'")
        if raw in ("true", "false"):
            overrides[key] = raw == "true"
        else:
            try:
                overrides[key] = int(raw)
            except ValueError:
                try:
                    overrides[key] = float(raw)
                except ValueError:
                    raise click.BadParameter(f"cannot parse value in '{pair}'")
    return overrides


@click.group()
def main() -> None:
    """Pulse-sequencer server and benchmark tools."""


@main.command("serve")
@click.option("--bind", default="127.0.0.1:6543", metavar="HOST:PORT", show_default=True)
@click.option("--board", type=click.Choice(sorted(BOARD_PROFILES)), default="ZCU216",
              show_default=True)
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Qubit model JSON file (built-in default if omitted).")
@click.option("--seed", type=int, default=None, help="Backend RNG seed.")
@click.option("--log-level", default="INFO", show_default=True)
@click.option("--connection-overhead", type=float, default=0.05, show_default=True,
              help="Modeled per-connection wall cost [s].")
@click.option("--load-overhead", type=float, default=0.2, show_default=True,
              help="Modeled per-program-load wall cost [s].")
@click.option("--read-timeout", type=float, default=30.0, show_default=True)
def serve_command(bind, board, model_path, seed, log_level, connection_overhead,
                  load_overhead, read_timeout) -> None:
    """Run the experiment server until interrupted."""
    host, port = _parse_bind(bind)
    config = ServerConfig(
        host=host,
        port=port,
        board=board,
        model_path=model_path,
        seed=seed,
        connection_overhead=connection_overhead,
        program_load_overhead=load_overhead,
        read_timeout=read_timeout,
        log_level=log_level,
    )
    try:
        run_server(config)
    except ServerError as exc:
        raise click.ClickException(str(exc))


@main.group()
def bench() -> None:
    """Benchmark and calibration-experiment commands."""


@bench.command("run")
@click.option("--kind", type=click.Choice(_KINDS), required=True)
@click.option("--points", type=int, default=None, help="Swept point count.")
@click.option("--shots", type=int, default=None, help="Hardware repetitions.")
@click.option("--relax", type=float, default=None, help="Relaxation delay [s].")
@click.option("--server", "server_addr", default="127.0.0.1:6543", metavar="HOST:PORT",
              show_default=True)
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE",
              help="Template parameter override; repeatable.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the dataset (.json or .csv).")
def bench_run(kind, points, shots, relax, server_addr, params, out_path) -> None:
    """Execute one experiment template against a running server."""
    host, port = _parse_bind(server_addr)
    overrides = _parse_overrides(params)
    if points is not None:
        overrides["points"] = points
    if shots is not None:
        overrides["reps"] = shots
    if relax is not None:
        overrides["relaxation"] = relax
    data = run_experiment(ExperimentKind(kind), host, port, overrides)
    if isinstance(data.x, tuple):
        x_out = [axis.tolist() for axis in data.x]
    else:
        x_out = np.asarray(data.x).tolist()
    if out_path is None or out_path.endswith(".json"):
        document = {
            "kind": data.kind.value,
            "x": x_out,
            "i": data.i.tolist(),
            "q": data.q.tolist(),
            "sequence_durations": data.sequence_durations,
            "n_connections": data.n_connections,
            "n_program_loads": data.n_program_loads,
            "shots": data.shots,
            "relaxation": data.relaxation,
        }
        text = json.dumps(document)
        if out_path is None:
            click.echo(text)
        else:
            Path(out_path).write_text(text + "\n", encoding="utf-8")
    elif out_path.endswith(".csv"):
        import csv as csv_module

        with open(out_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv_module.writer(handle)
            writer.writerow(["x", "i", "q"])
            flat_i = data.i.ravel()
            flat_q = data.q.ravel()
            flat_x = np.asarray(data.x[-1] if isinstance(data.x, tuple) else data.x)
            for n, (vi, vq) in enumerate(zip(flat_i, flat_q)):
                x_val = flat_x[n % len(flat_x)] if len(flat_x) else n
                writer.writerow([repr(float(x_val)), repr(float(vi)), repr(float(vq))])
    else:
        raise click.BadParameter("--out must end in .json or .csv")


@bench.command("scaling")
@click.option("--kind", type=click.Choice(_KINDS), required=True)
@click.option("--points", "points_list", default="1,10,100,1000,10000",
              show_default=True, help="Comma-separated point counts.")
@click.option("--shots", type=int, default=4096, show_default=True)
@click.option("--relax", type=float, default=5e-6, show_default=True)
@click.option("--server", "server_addr", default="127.0.0.1:6543", metavar="HOST:PORT",
              show_default=True)
@click.option("--connection-overhead", type=float, default=0.05, show_default=True)
@click.option("--load-overhead", type=float, default=0.2, show_default=True)
@click.option("--out", "out_csv", type=click.Path(dir_okay=False), default=None,
              help="CSV output path.")
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), default=None,
              help="PNG output path.")
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE")
def bench_scaling(kind, points_list, shots, relax, server_addr, connection_overhead,
                  load_overhead, out_csv, plot_path, params) -> None:
    """Sweep-scaling study: wall/ideal/ratio versus point count."""
    host, port = _parse_bind(server_addr)
    try:
        counts = [int(v) for v in points_list.split(",") if v]
    except ValueError:
        raise click.BadParameter(f"cannot parse point counts '{points_list}'")
    rows = scaling_report(
        ExperimentKind(kind),
        counts,
        host,
        port,
        shots=shots,
        relaxation=relax,
        overheads=OverheadModel(connection_overhead, load_overhead),
        params=_parse_overrides(params),
        out_csv=out_csv,
    )
    if plot_path is not None:
        emit_scaling_plot({kind: rows}, plot_path)
    for row in rows:
        click.echo(
            f"{row.kind} points={row.points} wall={row.wall:.6g}s "
            f"ideal={row.ideal:.6g}s ratio={row.ratio:.6g}"
        )


@bench.command("ideal")
@click.option("--shots", type=int, required=True)
@click.option("--relax", type=float, required=True, help="Relaxation delay [s].")
@click.option("--durations", "durations_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="File with one sequence duration [s] per line.")
def bench_ideal(shots, relax, durations_path) -> None:
    """Print the minimum qubit-occupancy time for a shot/duration budget."""
    durations = []
    for line in Path(durations_path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            durations.append(float(line))
    click.echo(repr(ideal_time(shots, durations, relax)))


if __name__ == "__main__":
    main()

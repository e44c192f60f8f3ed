"""Shared fixtures: board profiles, models, a server runner and a
deterministic generator of valid requests."""

from __future__ import annotations

import contextlib
import math
import random
import socket
import threading

import pytest

from rfpulse.backend_sim import BOARD_PROFILES, DEFAULT_MODEL, QubitModel
from rfpulse.components import (
    Arbitrary,
    Config,
    Drag,
    ExperimentRequest,
    Gaussian,
    OperationCode,
    Parameter,
    Pulse,
    PulseKind,
    Qubit,
    Rectangular,
    Sweeper,
)
from rfpulse.server import ExperimentServer, ServerConfig


@pytest.fixture
def zcu216():
    return BOARD_PROFILES["ZCU216"]


@pytest.fixture
def rfsoc4x2():
    return BOARD_PROFILES["RFSoc4x2"]


@pytest.fixture
def model():
    return DEFAULT_MODEL


@pytest.fixture
def noiseless_model():
    return QubitModel(
        resonator_frequency=5.5e9,
        resonator_linewidth=1e6,
        dispersive_shift=0.5e6,
        qubit_frequency_max=5.0e9,
        flux_offset=0.0,
        flux_period=1.0,
        pi_amplitude=0.5,
        reference_duration=40e-9,
        t1=10e-6,
        t2=15e-6,
        state0_center=(1.0, 0.0),
        state1_center=(-1.0, 0.0),
        blob_sigma=0.0,
    )


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@contextlib.contextmanager
def running_server(**overrides):
    """Start an ExperimentServer on a free port in a background thread."""
    config_kwargs = {"host": "127.0.0.1", "port": free_port(), "read_timeout": 5.0}
    config_kwargs.update(overrides)
    server = ExperimentServer(ServerConfig(**config_kwargs))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


@pytest.fixture
def server_factory():
    return running_server


def simple_readout(frequency: float = 5.5e9, start: float = 0.0, adc: int = 0) -> Pulse:
    return Pulse(
        kind=PulseKind.READOUT,
        shape=Rectangular(),
        frequency=frequency,
        amplitude=0.5,
        relative_phase=0.0,
        start=start,
        duration=1e-6,
        dac=0,
        adc=adc,
        name="ro",
    )


def simple_drive(
    frequency: float = 5.0e9,
    amplitude: float = 0.5,
    start: float = 0.0,
    duration: float = 4e-8,
    phase: float = 0.0,
) -> Pulse:
    return Pulse(
        kind=PulseKind.DRIVE,
        shape=Rectangular(),
        frequency=frequency,
        amplitude=amplitude,
        relative_phase=phase,
        start=start,
        duration=duration,
        dac=1,
        name="d0",
    )


def minimal_request(**cfg_overrides) -> ExperimentRequest:
    cfg = Config(**cfg_overrides) if cfg_overrides else Config()
    return ExperimentRequest(
        operation_code=OperationCode.EXECUTE_PULSE_SEQUENCE,
        cfg=cfg,
        sequence=(simple_readout(),),
        qubits=(Qubit(),),
    )


def _random_shape(rng: random.Random):
    roll = rng.random()
    if roll < 0.4:
        return Rectangular()
    if roll < 0.65:
        return Gaussian(rel_sigma=rng.uniform(2.0, 8.0))
    if roll < 0.85:
        return Drag(rel_sigma=rng.uniform(2.0, 8.0), beta=rng.uniform(-2.0, 2.0))
    count = rng.randint(2, 24)
    return Arbitrary(
        i_samples=tuple(rng.uniform(-1.0, 1.0) for _ in range(count)),
        q_samples=tuple(rng.uniform(-1.0, 1.0) for _ in range(count)),
    )


def random_request(rng: random.Random) -> ExperimentRequest:
    """A structurally valid request with randomized contents (ZCU216 limits)."""
    operation = rng.choice(list(OperationCode))
    n_pulses = rng.randint(1, 5)
    pulses = []
    cursor = 0.0
    has_flux_qubit = rng.random() < 0.5
    for n in range(n_pulses):
        kind = rng.choice([PulseKind.DRIVE, PulseKind.READOUT, PulseKind.FLUX])
        if kind is PulseKind.FLUX and not has_flux_qubit:
            kind = PulseKind.DRIVE
        duration = rng.uniform(2e-8, 2e-6)
        shape = Rectangular() if kind is PulseKind.FLUX else _random_shape(rng)
        pulses.append(
            Pulse(
                kind=kind,
                shape=shape,
                frequency=0.0 if kind is PulseKind.FLUX else rng.uniform(0.0, 6e9),
                amplitude=rng.uniform(-1.0, 1.0),
                relative_phase=rng.uniform(-math.pi, math.pi),
                start=cursor,
                duration=duration,
                dac={PulseKind.DRIVE: 1, PulseKind.READOUT: 0, PulseKind.FLUX: 2}[kind],
                adc=rng.randint(0, 1) if kind is PulseKind.READOUT else None,
                name=f"p{n}",
            )
        )
        cursor += duration + rng.uniform(0.0, 1e-7)
    if not any(p.kind is PulseKind.READOUT for p in pulses):
        pulses.append(simple_readout(start=cursor, adc=rng.randint(0, 1)))

    qubits = [Qubit(bias=rng.uniform(-0.5, 0.5), dac=2)] if has_flux_qubit else [Qubit()]

    sweepers = ()
    if operation is OperationCode.EXECUTE_SWEEPS:
        sweeper_list = []
        for _ in range(rng.randint(1, 2)):
            count = rng.randint(1, 2)
            parameters, indexes, starts, stops = [], [], [], []
            for _ in range(count):
                parameter = rng.choice(list(Parameter))
                if parameter is Parameter.BIAS:
                    if not has_flux_qubit:
                        parameter = Parameter.AMPLITUDE
                        indexes.append(rng.randrange(len(pulses)))
                    else:
                        indexes.append(0)
                else:
                    indexes.append(rng.randrange(len(pulses)))
                parameters.append(parameter)
                starts.append(rng.uniform(-1.0, 1.0))
                stops.append(rng.uniform(-1.0, 1.0))
            sweeper_list.append(
                Sweeper(
                    parameters=tuple(parameters),
                    indexes=tuple(indexes),
                    starts=tuple(starts),
                    stops=tuple(stops),
                    expts=rng.randint(1, 12),
                )
            )
        sweepers = tuple(sweeper_list)

    average = rng.random() < 0.7
    return ExperimentRequest(
        operation_code=operation,
        cfg=Config(
            reps=rng.randint(1, 4096),
            soft_avgs=rng.randint(1, 4) if average else 1,
            repetition_duration=rng.uniform(0.0, 5e-4),
            average=average,
        ),
        sequence=tuple(pulses),
        qubits=tuple(qubits),
        sweepers=sweepers,
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in report.nodeid or report.when != "call":
                continue
            name = report.nodeid.split("::")[-1]
            lines.append((name, "PASS" if status == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")

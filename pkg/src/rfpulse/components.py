"""Experiment components shared by clients and the server.

Pulses, sweep descriptions and acquisition configuration are plain immutable
values.  Constructors do not range-check: a request received off the wire is
always representable, and :func:`validate_request` reports every violation as
data so the server can reject bad requests without raising.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, NamedTuple, Union

import numpy as np

if TYPE_CHECKING:
    from rfpulse.backend_sim import BoardProfile

__all__ = [
    "PulseKind",
    "Parameter",
    "OperationCode",
    "Rectangular",
    "Gaussian",
    "Drag",
    "Arbitrary",
    "PulseShape",
    "Pulse",
    "Config",
    "Qubit",
    "Sweeper",
    "ExperimentRequest",
    "AcquisitionResult",
    "ParameterUpdate",
    "SweepGrid",
    "envelope_samples",
    "sweeper_values",
    "sweep_grid",
    "sweep_support_violations",
    "validate_request",
]


class PulseKind(str, Enum):
    DRIVE = "drive"
    READOUT = "readout"
    FLUX = "flux"


class Parameter(str, Enum):
    """Pulse or qubit fields a sweeper may scan."""

    FREQUENCY = "frequency"
    AMPLITUDE = "amplitude"
    RELATIVE_PHASE = "relative_phase"
    START = "start"
    DURATION = "duration"
    BIAS = "bias"


class OperationCode(str, Enum):
    EXECUTE_PULSE_SEQUENCE = "EXECUTE_PULSE_SEQUENCE"
    EXECUTE_PULSE_SEQUENCE_RAW = "EXECUTE_PULSE_SEQUENCE_RAW"
    EXECUTE_SWEEPS = "EXECUTE_SWEEPS"


@dataclass(frozen=True)
class Rectangular:
    """Constant envelope at the pulse amplitude."""


@dataclass(frozen=True)
class Gaussian:
    """Gaussian envelope; sigma in samples is n / rel_sigma."""

    rel_sigma: float


@dataclass(frozen=True)
class Drag:
    """Gaussian in-phase with a derivative-shaped quadrature scaled by beta."""

    rel_sigma: float
    beta: float


@dataclass(frozen=True)
class Arbitrary:
    """Custom waveform given by explicit in-phase/quadrature samples in [-1, 1]."""

    i_samples: tuple[float, ...]
    q_samples: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "i_samples", tuple(float(v) for v in self.i_samples))
        object.__setattr__(self, "q_samples", tuple(float(v) for v in self.q_samples))


PulseShape = Union[Rectangular, Gaussian, Drag, Arbitrary]


@dataclass(frozen=True)
class Pulse:
    """One timed RF or flux event on a DAC channel.

    ``start`` is absolute from the sequence origin, not relative to the
    previous pulse.  ``adc`` is present iff ``kind`` is readout.
    """

    kind: PulseKind
    shape: PulseShape
    frequency: float  # Hz
    amplitude: float  # fraction of DAC full scale, [-1, 1]
    relative_phase: float  # radians
    start: float  # s
    duration: float  # s
    dac: int
    adc: int | None = None
    name: str = ""


@dataclass(frozen=True)
class Config:
    """Acquisition configuration: repetitions, relaxation delay, averaging."""

    reps: int = 1000
    soft_avgs: int = 1
    repetition_duration: float = 100e-6  # s, wait between shots
    average: bool = True


@dataclass(frozen=True)
class Qubit:
    """Static flux bias for one qubit; ``dac`` is its flux channel."""

    bias: float | None = None
    dac: int | None = None


@dataclass(frozen=True)
class Sweeper:
    """One real-time scan: all listed parameters advance together.

    ``indexes`` target pulses by sequence position, or qubits when the
    co-positioned parameter is BIAS.
    """

    parameters: tuple[Parameter, ...]
    indexes: tuple[int, ...]
    starts: tuple[float, ...]
    stops: tuple[float, ...]
    expts: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "indexes", tuple(int(v) for v in self.indexes))
        object.__setattr__(self, "starts", tuple(float(v) for v in self.starts))
        object.__setattr__(self, "stops", tuple(float(v) for v in self.stops))


@dataclass(frozen=True)
class ExperimentRequest:
    """The unit of wire transfer: one fully described experiment."""

    operation_code: OperationCode
    cfg: Config
    sequence: tuple[Pulse, ...]
    qubits: tuple[Qubit, ...]
    sweepers: tuple[Sweeper, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "sequence", tuple(self.sequence))
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "sweepers", tuple(self.sweepers))


@dataclass
class AcquisitionResult:
    """Acquired in-phase/quadrature data; nesting depends on operation mode."""

    i: list
    q: list


class ParameterUpdate(NamedTuple):
    """One point-level rebind: set ``parameter`` of target ``index`` to ``value``."""

    parameter: Parameter
    index: int
    value: float


class SweepGrid(NamedTuple):
    assignments: list[tuple[ParameterUpdate, ...]]
    shape: tuple[int, ...]


def envelope_samples(
    shape: PulseShape, amplitude: float, duration: float, sampling_rate: float
) -> tuple[np.ndarray, np.ndarray]:
    """Synthesize the (i, q) sample arrays for one pulse.

    The pulse is quantized to ``n = round(duration * sampling_rate)`` samples
    (round-half-to-even) and must be at least two samples long.  The Gaussian
    peak equals ``amplitude``; no renormalization is applied after truncation
    at the pulse edges.  Arbitrary waveforms are resampled to ``n`` by
    nearest-neighbor when their length differs.
    """
    n = round(duration * sampling_rate)
    if n < 2:
        raise ValueError("pulse shorter than two samples")
    if isinstance(shape, Rectangular):
        return np.full(n, float(amplitude)), np.zeros(n)
    if isinstance(shape, (Gaussian, Drag)):
        sigma = n / shape.rel_sigma
        center = (n - 1) / 2.0
        k = np.arange(n, dtype=float)
        i = amplitude * np.exp(-((k - center) ** 2) / (2.0 * sigma * sigma))
        if isinstance(shape, Gaussian):
            return i, np.zeros(n)
        # central differences inside, one-sided at the edges
        return i, shape.beta * np.gradient(i)
    if isinstance(shape, Arbitrary):
        i_src = np.asarray(shape.i_samples, dtype=float)
        q_src = np.asarray(shape.q_samples, dtype=float)
        m = len(i_src)
        if m != n:
            if m == 1:
                idx = np.zeros(n, dtype=int)
            else:
                idx = np.rint(np.arange(n) * (m - 1) / (n - 1)).astype(int)
            i_src = i_src[idx]
            q_src = q_src[idx]
        return amplitude * i_src, amplitude * q_src
    raise TypeError(f"unknown pulse shape {type(shape).__name__}")


def sweeper_values(sweeper: Sweeper) -> list[np.ndarray]:
    """Endpoint-inclusive linear ranges, one array per swept parameter."""
    return [
        np.linspace(start, stop, sweeper.expts)
        for start, stop in zip(sweeper.starts, sweeper.stops)
    ]


def sweep_grid(sweepers: tuple[Sweeper, ...] | list[Sweeper]) -> SweepGrid:
    """Expand sweepers into the ordered list of point assignments.

    Sweepers combine as a Cartesian product with sweeper 0 outermost
    (row-major flattening); within one sweeper all parameters advance
    together.  An empty sweeper list yields a single empty assignment.
    """
    per_sweeper: list[list[tuple[ParameterUpdate, ...]]] = []
    for sw in sweepers:
        values = sweeper_values(sw)
        points = [
            tuple(
                ParameterUpdate(param, idx, float(values[j][k]))
                for j, (param, idx) in enumerate(zip(sw.parameters, sw.indexes))
            )
            for k in range(sw.expts)
        ]
        per_sweeper.append(points)
    assignments = [
        tuple(update for point in combo for update in point)
        for combo in itertools.product(*per_sweeper)
    ]
    return SweepGrid(assignments, tuple(sw.expts for sw in sweepers))


def sweep_support_violations(request: ExperimentRequest) -> list[str]:
    """Sweeper parameters the executor cannot scan in real time.

    Duration sweeps and frequency sweeps targeting non-drive pulses are
    rejected; clients fall back to per-point loops for those.
    """
    messages: list[str] = []
    for sw in request.sweepers:
        for param, idx in zip(sw.parameters, sw.indexes):
            if param is Parameter.DURATION:
                messages.append("unsupported sweeper parameter: duration")
            elif param is Parameter.FREQUENCY and 0 <= idx < len(request.sequence):
                kind = request.sequence[idx].kind
                if kind is PulseKind.READOUT:
                    messages.append(
                        "unsupported sweeper parameter: frequency (readout pulse)"
                    )
                elif kind is PulseKind.FLUX:
                    messages.append(
                        "unsupported sweeper parameter: frequency (flux pulse)"
                    )
    return list(dict.fromkeys(messages))


def _shape_violations(pulse: Pulse, label: str) -> list[str]:
    shape = pulse.shape
    out = []
    if isinstance(shape, (Gaussian, Drag)) and not shape.rel_sigma > 0:
        out.append(f"{label}: rel_sigma must be > 0")
    if isinstance(shape, Arbitrary):
        if len(shape.i_samples) == 0 or len(shape.i_samples) != len(shape.q_samples):
            out.append(f"{label}: arbitrary shape needs equal nonzero i/q sample lists")
        elif any(abs(v) > 1.0 for v in shape.i_samples + shape.q_samples):
            out.append(f"{label}: arbitrary samples outside [-1, 1]")
    return out


def validate_request(request: ExperimentRequest, profile: "BoardProfile") -> list[str]:
    """Collect every violation of the component invariants and board limits.

    Returns an empty list for a valid request.  Violations are data, not
    failures; the function never raises on bad field values.
    """
    v: list[str] = []
    cfg = request.cfg
    if cfg.reps < 1:
        v.append("cfg: reps must be >= 1")
    if cfg.soft_avgs < 1:
        v.append("cfg: soft_avgs must be >= 1")
    if cfg.repetition_duration < 0:
        v.append("cfg: repetition_duration must be >= 0")
    if not cfg.average and cfg.soft_avgs != 1:
        v.append("cfg: singleshot data cannot be software-averaged (soft_avgs must be 1)")

    if not request.sequence:
        v.append("sequence: must contain at least one pulse")
    elif not any(p.kind is PulseKind.READOUT for p in request.sequence):
        v.append("sequence: must contain at least one readout pulse")

    for n, pulse in enumerate(request.sequence):
        label = f"pulse {n}"
        v.extend(_shape_violations(pulse, label))
        if pulse.frequency < 0:
            v.append(f"{label}: frequency must be >= 0")
        elif pulse.frequency > profile.max_frequency:
            v.append(f"{label}: frequency above profile maximum")
        if not -1.0 <= pulse.amplitude <= 1.0:
            v.append(f"{label}: amplitude outside [-1, 1]")
        if pulse.start < 0:
            v.append(f"{label}: start must be >= 0")
        if not pulse.duration > 0:
            v.append(f"{label}: duration must be > 0")
        if not 0 <= pulse.dac < profile.active_dacs:
            v.append(f"{label}: dac out of range")
        if pulse.kind is PulseKind.READOUT:
            if pulse.adc is None:
                v.append(f"{label}: readout requires adc")
            elif not 0 <= pulse.adc < profile.active_adcs:
                v.append(f"{label}: adc out of range")
        elif pulse.adc is not None:
            v.append(f"{label}: adc only allowed on readout pulses")
        if pulse.kind is PulseKind.FLUX:
            if pulse.frequency != 0:
                v.append(f"{label}: flux pulse must have frequency 0")
            if not isinstance(pulse.shape, Rectangular):
                v.append(f"{label}: flux pulse must be rectangular")

    # same-channel overlap, on the unquantized timeline (half-open intervals)
    by_dac: dict[int, list[tuple[float, float, int]]] = {}
    for n, pulse in enumerate(request.sequence):
        by_dac.setdefault(pulse.dac, []).append(
            (pulse.start, pulse.start + pulse.duration, n)
        )
    for dac, spans in by_dac.items():
        spans.sort()
        for (s0, e0, a), (s1, _e1, b) in zip(spans, spans[1:]):
            if s1 < e0:
                v.append(f"pulse {a} and pulse {b}: overlap on dac {dac}")

    for n, qubit in enumerate(request.qubits):
        if qubit.bias is not None and qubit.dac is None:
            v.append(f"qubit {n}: bias requires a flux dac")
        if qubit.dac is not None and not 0 <= qubit.dac < profile.active_dacs:
            v.append(f"qubit {n}: dac out of range")

    for n, sw in enumerate(request.sweepers):
        label = f"sweeper {n}"
        lengths = {len(sw.parameters), len(sw.indexes), len(sw.starts), len(sw.stops)}
        if lengths != {len(sw.parameters)} or len(sw.parameters) == 0:
            v.append(f"{label}: parameters, indexes, starts, stops need equal nonzero length")
            continue
        if sw.expts < 1:
            v.append(f"{label}: expts must be >= 1")
        for param, idx in zip(sw.parameters, sw.indexes):
            if param is Parameter.BIAS:
                if not 0 <= idx < len(request.qubits):
                    v.append(f"{label}: index {idx} out of range for qubits")
                elif request.qubits[idx].dac is None:
                    v.append(f"{label}: bias sweep targets qubit without flux dac")
            elif not 0 <= idx < len(request.sequence):
                v.append(f"{label}: index {idx} out of range for sequence")

    if request.operation_code is OperationCode.EXECUTE_SWEEPS:
        if not request.sweepers:
            v.append("sweeps operation requires sweepers")
        v.extend(sweep_support_violations(request))
    elif request.sweepers:
        v.append("sequence operation takes no sweepers")

    return v

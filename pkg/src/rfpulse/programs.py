"""Compilation of validated requests into tick-quantized schedules, and the
three execution modes (fixed sequence, raw acquisition, real-time sweeps).

Compilation is pure and deterministic; executors require exclusive access to
a backend for their full duration.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from rfpulse import backend_sim
from rfpulse.backend_sim import BackendState, BoardProfile
from rfpulse.components import (
    AcquisitionResult,
    Config,
    ExperimentRequest,
    Parameter,
    ParameterUpdate,
    Pulse,
    PulseKind,
    PulseShape,
    envelope_samples,
    sweep_grid,
    sweep_support_violations,
)

__all__ = [
    "CompileError",
    "ExecutionError",
    "ScheduledPulse",
    "Acquisition",
    "Schedule",
    "compile",
    "apply_assignment",
    "execute_sequence",
    "execute_raw",
    "execute_sweeps",
]


class CompileError(Exception):
    pass


class ExecutionError(Exception):
    pass


@dataclass(eq=False)
class ScheduledPulse:
    """One synthesized event: envelope samples plus carrier settings.

    ``start_tick`` counts DAC samples from the sequence origin; ``amplitude``
    keeps the peak value for the backend's rotation model.
    """

    start_tick: int
    channel: int
    i_envelope: np.ndarray
    q_envelope: np.ndarray
    frequency: float  # Hz
    phase: float  # radians
    kind: PulseKind
    amplitude: float

    @property
    def n_samples(self) -> int:
        return len(self.i_envelope)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScheduledPulse):
            return NotImplemented
        return (
            self.start_tick == other.start_tick
            and self.channel == other.channel
            and self.frequency == other.frequency
            and self.phase == other.phase
            and self.kind == other.kind
            and self.amplitude == other.amplitude
            and np.array_equal(self.i_envelope, other.i_envelope)
            and np.array_equal(self.q_envelope, other.q_envelope)
        )


@dataclass(frozen=True)
class Acquisition:
    """Readout window on an ADC channel, in ADC ticks."""

    adc: int
    start_tick: int
    length: int
    frequency: float  # Hz, demodulation carrier


@dataclass(eq=False)
class Schedule:
    """Compiled, tick-quantized event list ready for execution."""

    events: tuple[ScheduledPulse, ...]
    acquisitions: tuple[Acquisition, ...]
    static_biases: dict[int, float]
    total_duration: float  # s

    def __eq__(self, other) -> bool:
        if not isinstance(other, Schedule):
            return NotImplemented
        return (
            self.events == tuple(other.events)
            and self.acquisitions == tuple(other.acquisitions)
            and self.static_biases == other.static_biases
            and self.total_duration == other.total_duration
        )


@lru_cache(maxsize=512)
def _unit_envelope(shape: PulseShape, n_samples: int, rate: float):
    # every supported shape scales linearly with amplitude, so unit envelopes
    # can be cached across sweep points
    i, q = envelope_samples(shape, 1.0, n_samples / rate, rate)
    i.setflags(write=False)
    q.setflags(write=False)
    return i, q


def compile(request: ExperimentRequest, profile: BoardProfile) -> Schedule:
    """Quantize the request onto the converter clocks and synthesize envelopes.

    Starts and durations are rounded half-to-even to the channel's converter
    rate.  Readout pulses additionally emit a co-timed acquisition window at
    the ADC rate.  Qubit biases become static channel levels for the whole
    schedule.
    """
    events: list[tuple[int, ScheduledPulse]] = []
    acquisitions: list[Acquisition] = []
    for n, pulse in enumerate(request.sequence):
        start_tick = round(pulse.start * profile.dac_rate)
        n_samples = round(pulse.duration * profile.dac_rate)
        if n_samples < 2:
            raise CompileError(f"pulse {n}: pulse shorter than two samples")
        unit_i, unit_q = _unit_envelope(pulse.shape, n_samples, profile.dac_rate)
        events.append(
            (
                n,
                ScheduledPulse(
                    start_tick=start_tick,
                    channel=pulse.dac,
                    i_envelope=pulse.amplitude * unit_i,
                    q_envelope=pulse.amplitude * unit_q,
                    frequency=pulse.frequency,
                    phase=pulse.relative_phase,
                    kind=pulse.kind,
                    amplitude=pulse.amplitude,
                ),
            )
        )
        if pulse.kind is PulseKind.READOUT:
            window = round(pulse.duration * profile.adc_rate)
            if window < 1:
                raise CompileError(f"pulse {n}: readout window shorter than one ADC sample")
            acquisitions.append(
                Acquisition(
                    adc=pulse.adc,
                    start_tick=round(pulse.start * profile.adc_rate),
                    length=window,
                    frequency=pulse.frequency,
                )
            )

    flux_dacs = {q.dac for q in request.qubits if q.dac is not None}
    for n, pulse in enumerate(request.sequence):
        if pulse.kind is PulseKind.FLUX and pulse.dac not in flux_dacs:
            raise CompileError(
                f"pulse {n}: flux pulse on dac {pulse.dac} matches no qubit flux dac"
            )

    by_channel: dict[int, list[tuple[int, int, int]]] = {}
    for n, event in events:
        by_channel.setdefault(event.channel, []).append(
            (event.start_tick, event.start_tick + event.n_samples, n)
        )
    for channel, spans in by_channel.items():
        spans.sort()
        for (s0, e0, a), (s1, _e1, b) in zip(spans, spans[1:]):
            if s1 < e0:
                raise CompileError(
                    f"pulse {a} and pulse {b}: overlap on dac {channel} after quantization"
                )

    # multiplexed readout: shared-ADC windows that overlap in time need
    # demodulation frequencies at least one window-inverse apart
    for a in range(len(acquisitions)):
        for b in range(a + 1, len(acquisitions)):
            one, two = acquisitions[a], acquisitions[b]
            if one.adc != two.adc:
                continue
            if one.start_tick + one.length <= two.start_tick:
                continue
            if two.start_tick + two.length <= one.start_tick:
                continue
            min_window = min(one.length, two.length) / profile.adc_rate
            if abs(one.frequency - two.frequency) < 1.0 / min_window:
                raise CompileError(
                    f"multiplexed readouts on adc {one.adc} need demodulation "
                    "frequencies separated by at least 1/window"
                )

    static_biases: dict[int, float] = {}
    for n, qubit in enumerate(request.qubits):
        if qubit.dac is None:
            continue
        if qubit.dac in static_biases:
            raise CompileError(f"qubit {n}: flux dac {qubit.dac} already assigned")
        static_biases[qubit.dac] = qubit.bias if qubit.bias is not None else 0.0

    end_of_events = max(
        ((e.start_tick + e.n_samples) / profile.dac_rate for _, e in events),
        default=0.0,
    )
    end_of_windows = max(
        ((a.start_tick + a.length) / profile.adc_rate for a in acquisitions),
        default=0.0,
    )
    return Schedule(
        events=tuple(e for _, e in sorted(events, key=lambda t: (t[1].start_tick, t[1].channel))),
        acquisitions=tuple(acquisitions),
        static_biases=static_biases,
        total_duration=max(end_of_events, end_of_windows),
    )


def apply_assignment(
    request: ExperimentRequest, assignment: tuple[ParameterUpdate, ...]
) -> ExperimentRequest:
    """Pure rewrite of the swept fields; the original request is unmodified."""
    pulses = list(request.sequence)
    qubits = list(request.qubits)
    for update in assignment:
        if update.parameter is Parameter.BIAS:
            qubits[update.index] = replace(qubits[update.index], bias=update.value)
        else:
            field_name = update.parameter.value
            pulses[update.index] = replace(
                pulses[update.index], **{field_name: update.value}
            )
    return replace(request, sequence=tuple(pulses), qubits=tuple(qubits))


def _assemble(per_acquisition: list[np.ndarray], average: bool) -> AcquisitionResult:
    if average:
        i = [float(v.real.mean()) for v in per_acquisition]
        q = [float(v.imag.mean()) for v in per_acquisition]
    else:
        i = [v.real.tolist() for v in per_acquisition]
        q = [v.imag.tolist() for v in per_acquisition]
    return AcquisitionResult(i=i, q=q)


def execute_sequence(
    schedule: Schedule, cfg: Config, backend: BackendState
) -> AcquisitionResult:
    """Run reps x soft_avgs shots and integrate each acquisition window.

    Averaged results have one value per readout; non-averaged results keep
    the per-shot axis.
    """
    n_shots = cfg.reps * cfg.soft_avgs
    values = backend_sim.run_shots(
        backend, schedule, n_shots, relaxation=cfg.repetition_duration
    )
    return _assemble(values, cfg.average)


def execute_raw(
    schedule: Schedule, cfg: Config, backend: BackendState
) -> AcquisitionResult:
    """Shot-averaged demodulated time series per readout window."""
    series = backend_sim.acquire_raw(backend, schedule, cfg)
    return AcquisitionResult(
        i=[s.real.tolist() for s in series],
        q=[s.imag.tolist() for s in series],
    )


def execute_sweeps(
    request: ExperimentRequest, schedule: Schedule, backend: BackendState
) -> AcquisitionResult:
    """Run the sweep grid point by point on one backend instance.

    Point order is row-major with sweeper 0 outermost.  Averaged results are
    shaped [n_readouts][n_points]; non-averaged [n_readouts][n_points][reps].
    """
    unsupported = sweep_support_violations(request)
    if unsupported:
        raise ExecutionError(unsupported[0])
    assignments, _shape = sweep_grid(request.sweepers)
    cfg = request.cfg
    n_shots = cfg.reps * cfg.soft_avgs
    n_acquisitions = len(schedule.acquisitions)
    per_point: list[list[np.ndarray]] = []
    for assignment in assignments:
        point_schedule = compile(apply_assignment(request, assignment), backend.profile)
        per_point.append(
            backend_sim.run_shots(
                backend, point_schedule, n_shots, relaxation=cfg.repetition_duration
            )
        )
    i: list = []
    q: list = []
    for acq in range(n_acquisitions):
        if cfg.average:
            i.append([float(point[acq].real.mean()) for point in per_point])
            q.append([float(point[acq].imag.mean()) for point in per_point])
        else:
            i.append([point[acq].real.tolist() for point in per_point])
            q.append([point[acq].imag.tolist() for point in per_point])
    return AcquisitionResult(i=i, q=q)

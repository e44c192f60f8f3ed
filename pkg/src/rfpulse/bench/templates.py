"""Calibration-experiment templates.

Each template expands to the exact list of requests the harness sends, so a
conforming client in any language can be checked payload-for-payload against
these builders.  Kinds that hit an unsupported real-time sweep parameter are
deliberately structured as per-point client loops; the rest use one sweep
request.  Parameter arithmetic here sticks to plain IEEE-754 operations in a
fixed order so mirrored builders produce bit-identical values.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from rfpulse.components import (
    Config,
    ExperimentRequest,
    OperationCode,
    Parameter,
    Pulse,
    PulseKind,
    Qubit,
    Rectangular,
    Sweeper,
    sweep_grid,
    sweeper_values,
)
from rfpulse.programs import apply_assignment

__all__ = [
    "ExperimentKind",
    "RTS_KINDS",
    "PER_POINT_KINDS",
    "default_params",
    "experiment_requests",
    "sweep_axis",
    "sweep_points",
    "point_durations",
    "request_duration",
]


class ExperimentKind(str, Enum):
    RESONATOR_SPECTROSCOPY = "resonator_spectroscopy"
    QUBIT_SPECTROSCOPY = "qubit_spectroscopy"
    RABI_AMPLITUDE = "rabi_amplitude"
    RABI_LENGTH = "rabi_length"
    T1 = "t1"
    RAMSEY_DETUNED = "ramsey_detuned"
    SINGLESHOT = "singleshot"
    FLUX_MAP = "flux_map"


# one sweep request on the server
RTS_KINDS = {
    ExperimentKind.QUBIT_SPECTROSCOPY,
    ExperimentKind.RABI_AMPLITUDE,
    ExperimentKind.T1,
    ExperimentKind.FLUX_MAP,
}
# one connection per point (readout frequency and duration cannot be swept
# in real time)
PER_POINT_KINDS = {
    ExperimentKind.RESONATOR_SPECTROSCOPY,
    ExperimentKind.RABI_LENGTH,
    ExperimentKind.RAMSEY_DETUNED,
}

_COMMON = {
    "reps": 4096,
    "average": True,
    "readout_frequency": 5.5e9,
    "readout_amplitude": 0.5,
    "readout_duration": 1e-6,
    "readout_dac": 0,
    "readout_adc": 0,
    "drive_dac": 1,
}

_DEFAULTS: dict[ExperimentKind, dict] = {
    ExperimentKind.RESONATOR_SPECTROSCOPY: {
        "points": 101,
        "frequency_start": 5.495e9,
        "frequency_stop": 5.505e9,
        "relaxation": 5e-6,
    },
    ExperimentKind.QUBIT_SPECTROSCOPY: {
        "points": 101,
        "frequency_start": 4.995e9,
        "frequency_stop": 5.005e9,
        "drive_amplitude": 0.02,
        "drive_duration": 1e-6,
        "relaxation": 5e-6,
    },
    ExperimentKind.RABI_AMPLITUDE: {
        "points": 101,
        "amplitude_start": 0.0,
        "amplitude_stop": 1.0,
        "drive_frequency": 5.0e9,
        "drive_duration": 4e-8,
        "relaxation": 300e-6,
    },
    ExperimentKind.RABI_LENGTH: {
        "points": 41,
        "duration_start": 4e-9,
        "duration_stop": 2e-7,
        "drive_frequency": 5.0e9,
        "drive_amplitude": 0.5,
        "relaxation": 300e-6,
    },
    ExperimentKind.T1: {
        "points": 41,
        "delay_start": 0.0,
        "delay_stop": 5e-5,
        "pi_amplitude": 0.5,
        "pi_duration": 4e-8,
        "drive_frequency": 5.0e9,
        "relaxation": 300e-6,
    },
    ExperimentKind.RAMSEY_DETUNED: {
        "points": 41,
        "delay_start": 0.0,
        "delay_stop": 3e-5,
        "detuning": 2e5,
        "half_pi_amplitude": 0.25,
        "pulse_duration": 4e-8,
        "drive_frequency": 5.0e9,
        "relaxation": 300e-6,
    },
    ExperimentKind.SINGLESHOT: {
        "reps": 5000,
        "average": False,
        "pi_amplitude": 0.5,
        "pi_duration": 4e-8,
        "drive_frequency": 5.0e9,
        "relaxation": 300e-6,
    },
    ExperimentKind.FLUX_MAP: {
        "points": 36,
        "frequency_start": 4.7e9,
        "frequency_stop": 5.05e9,
        "bias_points": 5,
        "bias_start": -0.1,
        "bias_stop": 0.1,
        "drive_amplitude": 0.02,
        "drive_duration": 1e-6,
        "flux_dac": 2,
        "relaxation": 5e-6,
    },
}


def default_params(kind: ExperimentKind) -> dict:
    params = dict(_COMMON)
    params.update(_DEFAULTS[kind])
    return params


def sweep_points(start: float, stop: float, n: int) -> list[float]:
    """Endpoint-inclusive linear spacing with pinned float arithmetic."""
    if n == 1:
        return [start]
    step = (stop - start) / (n - 1)
    values = [start + k * step for k in range(n)]
    values[-1] = stop
    return values


def _cfg(params: dict) -> Config:
    return Config(
        reps=int(params["reps"]),
        soft_avgs=1,
        repetition_duration=params["relaxation"],
        average=bool(params["average"]),
    )


def _readout(params: dict, start: float, frequency: float | None = None) -> Pulse:
    return Pulse(
        kind=PulseKind.READOUT,
        shape=Rectangular(),
        frequency=params["readout_frequency"] if frequency is None else frequency,
        amplitude=params["readout_amplitude"],
        relative_phase=0.0,
        start=start,
        duration=params["readout_duration"],
        dac=int(params["readout_dac"]),
        adc=int(params["readout_adc"]),
        name="ro",
    )


def _drive(
    params: dict,
    frequency: float,
    amplitude: float,
    start: float,
    duration: float,
    phase: float = 0.0,
    name: str = "d0",
) -> Pulse:
    return Pulse(
        kind=PulseKind.DRIVE,
        shape=Rectangular(),
        frequency=frequency,
        amplitude=amplitude,
        relative_phase=phase,
        start=start,
        duration=duration,
        dac=int(params["drive_dac"]),
        name=name,
    )


def experiment_requests(kind: ExperimentKind, params: dict) -> list[ExperimentRequest]:
    """The ordered list of requests this experiment sends to the server."""
    cfg = _cfg(params)
    no_qubit = (Qubit(),)

    if kind is ExperimentKind.RESONATOR_SPECTROSCOPY:
        return [
            ExperimentRequest(
                operation_code=OperationCode.EXECUTE_PULSE_SEQUENCE,
                cfg=cfg,
                sequence=(_readout(params, 0.0, frequency=freq),),
                qubits=no_qubit,
            )
            for freq in sweep_points(
                params["frequency_start"], params["frequency_stop"], int(params["points"])
            )
        ]

    if kind is ExperimentKind.QUBIT_SPECTROSCOPY:
        drive = _drive(
            params,
            frequency=params["frequency_start"],
            amplitude=params["drive_amplitude"],
            start=0.0,
            duration=params["drive_duration"],
        )
        readout = _readout(params, params["drive_duration"])
        sweeper = Sweeper(
            parameters=(Parameter.FREQUENCY,),
            indexes=(0,),
            starts=(params["frequency_start"],),
            stops=(params["frequency_stop"],),
            expts=int(params["points"]),
        )
        return [
            ExperimentRequest(
                operation_code=OperationCode.EXECUTE_SWEEPS,
                cfg=cfg,
                sequence=(drive, readout),
                qubits=no_qubit,
                sweepers=(sweeper,),
            )
        ]

    if kind is ExperimentKind.RABI_AMPLITUDE:
        drive = _drive(
            params,
            frequency=params["drive_frequency"],
            amplitude=params["amplitude_start"],
            start=0.0,
            duration=params["drive_duration"],
        )
        readout = _readout(params, params["drive_duration"])
        sweeper = Sweeper(
            parameters=(Parameter.AMPLITUDE,),
            indexes=(0,),
            starts=(params["amplitude_start"],),
            stops=(params["amplitude_stop"],),
            expts=int(params["points"]),
        )
        return [
            ExperimentRequest(
                operation_code=OperationCode.EXECUTE_SWEEPS,
                cfg=cfg,
                sequence=(drive, readout),
                qubits=no_qubit,
                sweepers=(sweeper,),
            )
        ]

    if kind is ExperimentKind.RABI_LENGTH:
        requests = []
        for duration in sweep_points(
            params["duration_start"], params["duration_stop"], int(params["points"])
        ):
            drive = _drive(
                params,
                frequency=params["drive_frequency"],
                amplitude=params["drive_amplitude"],
                start=0.0,
                duration=duration,
            )
            requests.append(
                ExperimentRequest(
                    operation_code=OperationCode.EXECUTE_PULSE_SEQUENCE,
                    cfg=cfg,
                    sequence=(drive, _readout(params, duration)),
                    qubits=no_qubit,
                )
            )
        return requests

    if kind is ExperimentKind.T1:
        pi_pulse = _drive(
            params,
            frequency=params["drive_frequency"],
            amplitude=params["pi_amplitude"],
            start=0.0,
            duration=params["pi_duration"],
        )
        readout_start = params["pi_duration"] + params["delay_start"]
        readout = _readout(params, readout_start)
        sweeper = Sweeper(
            parameters=(Parameter.START,),
            indexes=(1,),
            starts=(readout_start,),
            stops=(params["pi_duration"] + params["delay_stop"],),
            expts=int(params["points"]),
        )
        return [
            ExperimentRequest(
                operation_code=OperationCode.EXECUTE_SWEEPS,
                cfg=cfg,
                sequence=(pi_pulse, readout),
                qubits=no_qubit,
                sweepers=(sweeper,),
            )
        ]

    if kind is ExperimentKind.RAMSEY_DETUNED:
        requests = []
        duration = params["pulse_duration"]
        for delay in sweep_points(
            params["delay_start"], params["delay_stop"], int(params["points"])
        ):
            second_start = duration + delay
            readout_start = second_start + duration
            phase = 2.0 * math.pi * params["detuning"] * delay
            first = _drive(
                params,
                frequency=params["drive_frequency"],
                amplitude=params["half_pi_amplitude"],
                start=0.0,
                duration=duration,
                name="d0",
            )
            second = _drive(
                params,
                frequency=params["drive_frequency"],
                amplitude=params["half_pi_amplitude"],
                start=second_start,
                duration=duration,
                phase=phase,
                name="d1",
            )
            requests.append(
                ExperimentRequest(
                    operation_code=OperationCode.EXECUTE_PULSE_SEQUENCE,
                    cfg=cfg,
                    sequence=(first, second, _readout(params, readout_start)),
                    qubits=no_qubit,
                )
            )
        return requests

    if kind is ExperimentKind.SINGLESHOT:
        ground = ExperimentRequest(
            operation_code=OperationCode.EXECUTE_PULSE_SEQUENCE,
            cfg=cfg,
            sequence=(_readout(params, 0.0),),
            qubits=no_qubit,
        )
        pi_pulse = _drive(
            params,
            frequency=params["drive_frequency"],
            amplitude=params["pi_amplitude"],
            start=0.0,
            duration=params["pi_duration"],
        )
        excited = ExperimentRequest(
            operation_code=OperationCode.EXECUTE_PULSE_SEQUENCE,
            cfg=cfg,
            sequence=(pi_pulse, _readout(params, params["pi_duration"])),
            qubits=no_qubit,
        )
        return [ground, excited]

    if kind is ExperimentKind.FLUX_MAP:
        drive = _drive(
            params,
            frequency=params["frequency_start"],
            amplitude=params["drive_amplitude"],
            start=0.0,
            duration=params["drive_duration"],
        )
        readout = _readout(params, params["drive_duration"])
        qubit = Qubit(bias=params["bias_start"], dac=int(params["flux_dac"]))
        bias_sweeper = Sweeper(
            parameters=(Parameter.BIAS,),
            indexes=(0,),
            starts=(params["bias_start"],),
            stops=(params["bias_stop"],),
            expts=int(params["bias_points"]),
        )
        freq_sweeper = Sweeper(
            parameters=(Parameter.FREQUENCY,),
            indexes=(0,),
            starts=(params["frequency_start"],),
            stops=(params["frequency_stop"],),
            expts=int(params["points"]),
        )
        return [
            ExperimentRequest(
                operation_code=OperationCode.EXECUTE_SWEEPS,
                cfg=cfg,
                sequence=(drive, readout),
                qubits=(qubit,),
                sweepers=(bias_sweeper, freq_sweeper),
            )
        ]

    raise ValueError(f"unknown experiment kind {kind!r}")


def sweep_axis(kind: ExperimentKind, params: dict):
    """Swept x values, matching the server-side expansion for sweep requests."""
    if kind is ExperimentKind.RESONATOR_SPECTROSCOPY:
        return np.array(
            sweep_points(params["frequency_start"], params["frequency_stop"], int(params["points"]))
        )
    if kind is ExperimentKind.RABI_LENGTH:
        return np.array(
            sweep_points(params["duration_start"], params["duration_stop"], int(params["points"]))
        )
    if kind is ExperimentKind.RAMSEY_DETUNED:
        return np.array(
            sweep_points(params["delay_start"], params["delay_stop"], int(params["points"]))
        )
    if kind is ExperimentKind.SINGLESHOT:
        return np.array([0.0, 1.0])  # prepared state
    request = experiment_requests(kind, params)[0]
    values = [sweeper_values(sw)[0] for sw in request.sweepers]
    if kind is ExperimentKind.T1:
        return values[0] - params["pi_duration"]  # delay after the pi pulse
    if kind is ExperimentKind.FLUX_MAP:
        return values[0], values[1]
    return values[0]


def request_duration(request: ExperimentRequest) -> float:
    """Unquantized sequence duration: end of the last pulse."""
    return max(p.start + p.duration for p in request.sequence)


def point_durations(kind: ExperimentKind, params: dict, requests: list[ExperimentRequest]) -> list[float]:
    """Per-point sequence durations entering the ideal-time sum."""
    if kind in RTS_KINDS:
        request = requests[0]
        assignments, _ = sweep_grid(request.sweepers)
        swept = {u.parameter for a in assignments[:1] for u in a}
        if Parameter.START not in swept and Parameter.DURATION not in swept:
            return [request_duration(request)] * len(assignments)
        return [
            request_duration(apply_assignment(request, assignment))
            for assignment in assignments
        ]
    return [request_duration(r) for r in requests]

"""Deterministic simulated backend for the pulse-sequencer stack.

Stands in for RFSoC control electronics: board converter profiles, a
two-level-system model that produces the returned IQ data, a random but
per-instance-constant converter clock phase, and an affine wall-time overhead
model used by the benchmark harness.

The physics is intentionally the simplest model with the right qualitative
behavior: Lorentzian drive response, square-root-cosine flux tuning,
exponential amplitude/phase damping, Gaussian readout blobs behind a
Lorentzian resonator transmission factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from rfpulse.components import Config, PulseKind

if TYPE_CHECKING:
    from rfpulse.programs import Schedule

__all__ = [
    "BoardProfile",
    "BOARD_PROFILES",
    "QubitModel",
    "DEFAULT_MODEL",
    "OverheadModel",
    "BackendState",
    "Discriminator",
    "init_backend",
    "load_model",
    "write_model",
    "bias_to_frequency",
    "run_shot",
    "run_shots",
    "acquire_raw",
    "simulated_wall_time",
    "classify",
    "fit_discriminator",
]


@dataclass(frozen=True)
class BoardProfile:
    """Converter counts and rates for one supported board."""

    name: str
    active_dacs: int
    active_adcs: int
    dac_rate: float  # Hz
    adc_rate: float  # Hz
    max_frequency: float  # Hz, synthesis limit


BOARD_PROFILES: dict[str, BoardProfile] = {
    "ZCU111": BoardProfile("ZCU111", 7, 2, 6.554e9, 4.096e9, 6e9),
    "RFSoc4x2": BoardProfile("RFSoc4x2", 2, 2, 9.85e9, 5.0e9, 6e9),
    "ZCU216": BoardProfile("ZCU216", 7, 2, 9.85e9, 2.5e9, 6e9),
}


@dataclass(frozen=True)
class QubitModel:
    """Single-qubit device parameters driving the simulated responses."""

    resonator_frequency: float  # Hz
    resonator_linewidth: float  # Hz, kappa
    dispersive_shift: float  # Hz, chi
    qubit_frequency_max: float  # Hz, 0-1 transition at the flux sweet spot
    flux_offset: float  # V, sweet-spot bias
    flux_period: float  # V
    pi_amplitude: float  # DAC fraction giving a pi rotation at reference_duration
    reference_duration: float  # s
    t1: float  # s
    t2: float  # s
    state0_center: tuple[float, float]
    state1_center: tuple[float, float]
    blob_sigma: float  # per-quadrature readout noise

    def __post_init__(self) -> None:
        object.__setattr__(self, "state0_center", tuple(self.state0_center))
        object.__setattr__(self, "state1_center", tuple(self.state1_center))
        if self.resonator_linewidth <= 0:
            raise ValueError("resonator_linewidth must be > 0")
        if not 0 < self.pi_amplitude <= 1:
            raise ValueError("pi_amplitude must be in (0, 1]")
        if self.t1 <= 0 or self.t2 <= 0 or self.t2 > 2 * self.t1:
            raise ValueError("need t1 > 0 and 0 < t2 <= 2*t1")
        if self.blob_sigma < 0:
            raise ValueError("blob_sigma must be >= 0")
        if self.reference_duration <= 0:
            raise ValueError("reference_duration must be > 0")
        if self.flux_period == 0:
            raise ValueError("flux_period must be nonzero")


DEFAULT_MODEL = QubitModel(
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
    blob_sigma=0.1,
)

_MODEL_KEYS = tuple(QubitModel.__dataclass_fields__)


def load_model(path: str | Path) -> QubitModel:
    """Load a qubit model from a JSON file keyed by the QubitModel fields."""
    with open(path, encoding="utf-8") as handle:
        obj = json.load(handle)
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: model file must hold a JSON object")
    missing = [k for k in _MODEL_KEYS if k not in obj]
    extra = [k for k in obj if k not in _MODEL_KEYS]
    if missing:
        raise ValueError(f"{path}: missing model key '{missing[0]}'")
    if extra:
        raise ValueError(f"{path}: unknown model key '{extra[0]}'")
    obj = dict(obj)
    for key in ("state0_center", "state1_center"):
        center = obj[key]
        if not (isinstance(center, list) and len(center) == 2):
            raise ValueError(f"{path}: {key} must be a [i, q] pair")
        obj[key] = (float(center[0]), float(center[1]))
    return QubitModel(**obj)


def write_model(model: QubitModel, path: str | Path) -> None:
    obj = {k: getattr(model, k) for k in _MODEL_KEYS}
    obj["state0_center"] = list(model.state0_center)
    obj["state1_center"] = list(model.state1_center)
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class OverheadModel:
    """Per-connection and per-program-load wall-time costs (seconds).

    Calibration knobs for desk-scale runs, not measured hardware values.
    """

    connection_overhead: float = 0.05
    program_load_overhead: float = 0.2

    def __post_init__(self) -> None:
        if self.connection_overhead < 0 or self.program_load_overhead < 0:
            raise ValueError("overheads must be >= 0")


@dataclass
class BackendState:
    """One live backend instance.

    ``clock_phase`` is drawn once at initialization and stays constant for
    the lifetime of the state; re-initializing redraws it, which is what
    destroys phase coherence between experiments.  ``simulated_seconds``
    accumulates qubit-occupancy time for benchmark accounting.
    """

    model: QubitModel
    profile: BoardProfile
    clock_phase: float
    rng: np.random.Generator
    overheads: OverheadModel = field(default_factory=OverheadModel)
    simulated_seconds: float = 0.0


def init_backend(
    model: QubitModel,
    profile: BoardProfile,
    seed: int | None = None,
    overheads: OverheadModel | None = None,
) -> BackendState:
    """Create a backend; equal seeds give identical states."""
    rng = np.random.default_rng(seed)
    clock_phase = float(rng.uniform(0.0, 2.0 * math.pi))
    return BackendState(
        model=model,
        profile=profile,
        clock_phase=clock_phase,
        rng=rng,
        overheads=overheads if overheads is not None else OverheadModel(),
    )


def bias_to_frequency(model: QubitModel, flux_level: float) -> float:
    """0-1 transition frequency at a flux bias (tunable-transmon form)."""
    phase = math.pi * (flux_level - model.flux_offset) / model.flux_period
    return model.qubit_frequency_max * math.sqrt(abs(math.cos(phase)))


def _decay(x: np.ndarray, y: np.ndarray, z: np.ndarray, dt: float, model: QubitModel):
    g2 = math.exp(-dt / model.t2)
    g1 = math.exp(-dt / model.t1)
    # z relaxes toward the ground state: z -> 1 - (1 - z) * exp(-dt/T1)
    return x * g2, y * g2, 1.0 - (1.0 - z) * g1


def _rotate(x, y, z, axis_phase: float, theta: float):
    # Rodrigues rotation about the in-plane axis (cos phi, sin phi, 0)
    ux = math.cos(axis_phase)
    uy = math.sin(axis_phase)
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    dot = ux * x + uy * y
    nx = x * cos_t + uy * z * sin_t + ux * dot * (1.0 - cos_t)
    ny = y * cos_t - ux * z * sin_t + uy * dot * (1.0 - cos_t)
    nz = z * cos_t + (ux * y - uy * x) * sin_t
    return nx, ny, nz


def _simulate_shots(
    state: BackendState,
    schedule: "Schedule",
    n_shots: int,
    include_blob_noise: bool,
) -> list[np.ndarray]:
    """Evolve ``n_shots`` independent Bloch vectors through the schedule.

    Returns one complex array of per-shot IQ values per acquisition, in
    sequence order.  Random draws happen in window-time order: one uniform
    vector for the state collapse, then (noise on) one standard-normal pair
    per shot.
    """
    model = state.model
    profile = state.profile

    timeline: list[tuple[float, int, int, object]] = []
    counter = 0
    for event in schedule.events:
        if event.kind is PulseKind.DRIVE:
            t0 = event.start_tick / profile.dac_rate
            timeline.append((t0, 0, counter, event))
            counter += 1
    for seq_idx, acq in enumerate(schedule.acquisitions):
        t0 = acq.start_tick / profile.adc_rate
        timeline.append((t0, 1, counter, (seq_idx, acq)))
        counter += 1
    timeline.sort(key=lambda item: item[:3])

    flux_windows = [
        (
            ev.start_tick / profile.dac_rate,
            (ev.start_tick + ev.n_samples) / profile.dac_rate,
            ev.amplitude,
        )
        for ev in schedule.events
        if ev.kind is PulseKind.FLUX
    ]
    static_flux = float(sum(schedule.static_biases.values()))
    phase_factor = complex(math.cos(state.clock_phase), math.sin(state.clock_phase))

    x = np.zeros(n_shots)
    y = np.zeros(n_shots)
    z = np.ones(n_shots)
    now = 0.0
    collected: list[np.ndarray | None] = [None] * len(schedule.acquisitions)

    for t0, priority, _, payload in timeline:
        if t0 > now:
            x, y, z = _decay(x, y, z, t0 - now, model)
            now = t0
        if priority == 0:
            event = payload
            flux = static_flux + sum(
                amp for (f0, f1, amp) in flux_windows if f0 <= t0 < f1
            )
            ratio = event.amplitude / model.pi_amplitude
            duration = event.n_samples / profile.dac_rate
            if ratio != 0.0:
                omega = abs(ratio) / (2.0 * model.reference_duration)
                detuning = event.frequency - bias_to_frequency(model, flux)
                line = 1.0 / (1.0 + (2.0 * detuning / omega) ** 2)
                theta = math.pi * ratio * (duration / model.reference_duration) * line
                x, y, z = _rotate(x, y, z, event.phase, theta)
            now = max(now, t0 + duration)
        else:
            seq_idx, acq = payload
            p_excited = np.clip((1.0 - z) * 0.5, 0.0, 1.0)
            excited = state.rng.random(n_shots) < p_excited
            z = np.where(excited, -1.0, 1.0)
            x = np.zeros(n_shots)
            y = np.zeros(n_shots)
            kappa = model.resonator_linewidth
            d0 = (acq.frequency - model.resonator_frequency) * 2.0 / kappa
            d1 = (
                (acq.frequency - model.resonator_frequency - model.dispersive_shift)
                * 2.0
                / kappa
            )
            c0 = complex(*model.state0_center) / (1.0 + d0 * d0)
            c1 = complex(*model.state1_center) / (1.0 + d1 * d1)
            values = np.where(excited, c1, c0)
            if include_blob_noise and model.blob_sigma > 0:
                noise = state.rng.standard_normal((n_shots, 2))
                values = values + model.blob_sigma * (noise[:, 0] + 1j * noise[:, 1])
            collected[seq_idx] = values * phase_factor
            now = max(now, t0 + acq.length / profile.adc_rate)

    return [v for v in collected if v is not None]


def run_shots(
    state: BackendState,
    schedule: "Schedule",
    n_shots: int,
    relaxation: float = 0.0,
) -> list[np.ndarray]:
    """Run ``n_shots`` shots; returns one complex (n_shots,) array per acquisition."""
    values = _simulate_shots(state, schedule, n_shots, include_blob_noise=True)
    state.simulated_seconds += n_shots * (schedule.total_duration + relaxation)
    return values


def run_shot(state: BackendState, schedule: "Schedule") -> list[tuple[float, float]]:
    """Single shot; returns one (i, q) pair per acquisition."""
    values = run_shots(state, schedule, 1)
    return [(float(v.real[0]), float(v.imag[0])) for v in values]


_RAW_CHUNK = 256  # shots per noise block; fixed so the rng stream is reproducible


def acquire_raw(
    state: BackendState, schedule: "Schedule", cfg: Config
) -> list[np.ndarray]:
    """Shot-averaged demodulated time series, one complex array per acquisition.

    Each window sample is the shot's noise-free IQ value plus per-sample noise
    of ``blob_sigma * sqrt(window_length)``, so the window mean has the same
    variance as an integrated shot.
    """
    n_shots = cfg.reps * cfg.soft_avgs
    values = _simulate_shots(state, schedule, n_shots, include_blob_noise=False)
    series: list[np.ndarray] = []
    for acq, shot_values in zip(schedule.acquisitions, values):
        window = acq.length
        sigma = state.model.blob_sigma * math.sqrt(window)
        acc = np.zeros(window, dtype=complex)
        if sigma > 0:
            for base in range(0, n_shots, _RAW_CHUNK):
                count = min(_RAW_CHUNK, n_shots - base)
                noise = state.rng.standard_normal((count, window, 2))
                block = shot_values[base : base + count, None] + sigma * (
                    noise[..., 0] + 1j * noise[..., 1]
                )
                acc += block.sum(axis=0)
        else:
            acc += shot_values.sum() * np.ones(window)
        series.append(acc / n_shots)
    state.simulated_seconds += n_shots * (
        schedule.total_duration + cfg.repetition_duration
    )
    return series


def simulated_wall_time(
    n_program_loads: int,
    n_connections: int,
    ideal: float,
    overheads: OverheadModel,
) -> float:
    """Affine wall-time model: ideal time plus connection and load costs."""
    return (
        ideal
        + n_connections * overheads.connection_overhead
        + n_program_loads * overheads.program_load_overhead
    )


@dataclass(frozen=True)
class Discriminator:
    """Linear state discriminator: project on ``angle``, compare to ``threshold``."""

    angle: float  # radians
    threshold: float


def fit_discriminator(
    center0: tuple[float, float], center1: tuple[float, float]
) -> Discriminator:
    """Discriminator whose axis joins the two blob centers, threshold midway."""
    di = center1[0] - center0[0]
    dq = center1[1] - center0[1]
    angle = math.atan2(dq, di)
    mid_i = (center0[0] + center1[0]) / 2.0
    mid_q = (center0[1] + center1[1]) / 2.0
    threshold = mid_i * math.cos(angle) + mid_q * math.sin(angle)
    return Discriminator(angle=angle, threshold=threshold)


def classify(i, q, discriminator: Discriminator):
    """Assign 0/1 by thresholded projection; ties go to the ground state."""
    projection = np.asarray(i) * math.cos(discriminator.angle) + np.asarray(
        q
    ) * math.sin(discriminator.angle)
    labels = (projection > discriminator.threshold).astype(int)
    if labels.ndim == 0:
        return int(labels)
    return labels

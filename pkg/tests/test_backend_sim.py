"""Simulated backend: determinism, physics sanity, timing model."""

import math

import numpy as np
import pytest
from scipy.special import erfcinv

from rfpulse import programs
from rfpulse.backend_sim import (
    BOARD_PROFILES,
    DEFAULT_MODEL,
    BackendState,
    OverheadModel,
    QubitModel,
    acquire_raw,
    bias_to_frequency,
    classify,
    Discriminator,
    fit_discriminator,
    init_backend,
    load_model,
    run_shot,
    run_shots,
    simulated_wall_time,
    write_model,
)
from rfpulse.components import (
    Config,
    ExperimentRequest,
    OperationCode,
    Qubit,
)

from conftest import simple_drive, simple_readout


def _schedule(pulses, qubits=(Qubit(),), profile=None):
    profile = profile or BOARD_PROFILES["ZCU216"]
    request = ExperimentRequest(
        OperationCode.EXECUTE_PULSE_SEQUENCE, Config(), tuple(pulses), tuple(qubits)
    )
    return programs.compile(request, profile)


@pytest.fixture
def profile():
    return BOARD_PROFILES["ZCU216"]


class TestInitBackend:
    def test_same_seed_identical(self, model, profile):
        a = init_backend(model, profile, seed=0)
        b = init_backend(model, profile, seed=0)
        assert a.clock_phase == b.clock_phase

    def test_different_seeds_differ(self, model, profile):
        a = init_backend(model, profile, seed=0)
        b = init_backend(model, profile, seed=1)
        assert a.clock_phase != b.clock_phase

    def test_clock_phase_range(self, model, profile):
        for seed in range(20):
            state = init_backend(model, profile, seed=seed)
            assert 0.0 <= state.clock_phase < 2.0 * math.pi


class TestBiasToFrequency:
    def test_sweet_spot(self, model):
        assert bias_to_frequency(model, model.flux_offset) == model.qubit_frequency_max

    def test_cosine_zero(self, model):
        level = model.flux_offset + model.flux_period / 2.0
        # cos(pi/2) is ~6e-17 in floats; the sqrt leaves a few tens of Hz
        assert bias_to_frequency(model, level) == pytest.approx(0.0, abs=1e2)

    def test_sixth_period_closed_form(self, model):
        # oracle: f_max * sqrt(cos(pi/6)) evaluated directly
        level = model.flux_offset + model.flux_period / 6.0
        expected = model.qubit_frequency_max * math.sqrt(math.cos(math.pi / 6.0))
        assert bias_to_frequency(model, level) == pytest.approx(expected, rel=1e-12)
        assert expected / model.qubit_frequency_max == pytest.approx(0.9306, abs=1e-4)

    def test_periodic_and_even(self, model):
        for level in (0.07, -0.22, 0.4):
            f = bias_to_frequency(model, level)
            assert bias_to_frequency(model, level + model.flux_period) == pytest.approx(f)
            assert bias_to_frequency(
                model, 2 * model.flux_offset - level
            ) == pytest.approx(f)


class TestRunShot:
    def test_ground_state_deterministic(self, noiseless_model, profile):
        state = init_backend(noiseless_model, profile, seed=0)
        sched = _schedule([simple_readout()])
        ((i, q),) = run_shot(state, sched)
        # resonator driven at its bare frequency: state-0 factor is exactly 1
        expected = complex(1.0, 0.0) * complex(
            math.cos(state.clock_phase), math.sin(state.clock_phase)
        )
        assert i == pytest.approx(expected.real, abs=1e-12)
        assert q == pytest.approx(expected.imag, abs=1e-12)

    def test_pi_pulse_excites(self, noiseless_model, profile):
        state = init_backend(noiseless_model, profile, seed=1)
        sched = _schedule([simple_drive(), simple_readout(start=4e-8)])
        values = run_shots(state, sched, 4096)
        # excited blob has resonator factor 0.5 at the bare-resonator carrier
        excited = np.abs(values[0] + 0.0) < 0.75
        p = excited.mean()
        assert p > 1 - 4 * math.sqrt(0.01 / 4096) - 0.01  # ~1 within sampling error

    def test_t1_decay_e_minus_one(self, noiseless_model, profile):
        # pi pulse, wait exactly T1, then read out: p_excited = exp(-1)
        state = init_backend(noiseless_model, profile, seed=2)
        delay = noiseless_model.t1
        sched = _schedule([simple_drive(), simple_readout(start=4e-8 + delay)])
        n = 20000
        values = run_shots(state, sched, n)
        excited = np.abs(values[0]) < 0.75
        p_hat = excited.mean()
        p = math.exp(-1.0)
        assert abs(p_hat - p) < 4.0 * math.sqrt(p * (1 - p) / n)

    def test_determinism_bit_identical(self, model, profile):
        sched = _schedule([simple_drive(), simple_readout(start=4e-8)])
        a = init_backend(model, profile, seed=11)
        b = init_backend(model, profile, seed=11)
        va = run_shots(a, sched, 100)
        vb = run_shots(b, sched, 100)
        assert all(np.array_equal(x, y) for x, y in zip(va, vb))

    def test_clock_phase_rotates_rigidly(self, model, profile):
        sched = _schedule([simple_readout()])
        base = init_backend(model, profile, seed=3)
        shifted = init_backend(model, profile, seed=3)
        delta = 0.7
        shifted.clock_phase = base.clock_phase + delta
        va = run_shots(base, sched, 50)[0]
        vb = run_shots(shifted, sched, 50)[0]
        rotation = np.angle(vb / va)
        assert np.allclose(rotation, delta, atol=1e-9)

    def test_phase_coherent_within_one_state(self, noiseless_model, profile):
        state = init_backend(noiseless_model, profile, seed=4)
        sched = _schedule([simple_readout()])
        first = run_shot(state, sched)[0]
        second = run_shot(state, sched)[0]
        assert math.atan2(first[1], first[0]) == math.atan2(second[1], second[0])

    def test_flux_pulse_shifts_drive_resonance(self, noiseless_model, profile):
        # a flux pulse under the drive detunes the qubit, weakening the rotation
        from rfpulse.components import Pulse, PulseKind, Rectangular

        flux = Pulse(
            PulseKind.FLUX, Rectangular(), 0.0, 0.3, 0.0, 0.0, 2e-7, dac=2, name="fl"
        )
        drive = simple_drive(start=1e-8)
        readout = simple_readout(start=2.2e-7)
        qubit = Qubit(bias=None, dac=2)
        with_flux = _schedule([flux, drive, readout], qubits=(qubit,))
        without_flux = _schedule([drive, readout], qubits=(qubit,))
        state = init_backend(noiseless_model, profile, seed=5)
        p_with = (np.abs(run_shots(state, with_flux, 2000)[0]) < 0.75).mean()
        p_without = (np.abs(run_shots(state, without_flux, 2000)[0]) < 0.75).mean()
        # ~0.17 us of T1 decay before the readout caps p_without near 0.983
        assert p_without > 0.96
        assert p_with < 0.1


class TestAcquireRaw:
    def test_flat_series_noise_off(self, noiseless_model, profile):
        state = init_backend(noiseless_model, profile, seed=0)
        sched = _schedule([simple_readout()])
        series = acquire_raw(state, sched, Config(reps=1))[0]
        assert len(series) == 2500  # 1 us at 2.5 GSPS
        assert np.all(series == series[0])

    def test_series_mean_equals_integrated_value(self, noiseless_model, profile):
        sched = _schedule([simple_readout()])
        raw_state = init_backend(noiseless_model, profile, seed=6)
        seq_state = init_backend(noiseless_model, profile, seed=6)
        series = acquire_raw(raw_state, sched, Config(reps=16))[0]
        integrated = run_shots(seq_state, sched, 16)[0].mean()
        assert abs(series.mean() - integrated) <= 1e-9 * abs(integrated)

    def test_window_mean_variance_matches_integrated_shot(self, model, profile):
        # oracle: Monte-Carlo variance comparison across seeded trials
        sched = _schedule([simple_readout()])
        cfg = Config(reps=1)
        raw_means = []
        integrated = []
        for seed in range(1000):
            state = init_backend(model, profile, seed=seed)
            raw_means.append(acquire_raw(state, sched, cfg)[0].mean())
            state2 = init_backend(model, profile, seed=10_000 + seed)
            integrated.append(run_shots(state2, sched, 1)[0][0])
        var_raw = np.var(np.real(raw_means))
        var_int = np.var(np.real(integrated))
        assert var_raw == pytest.approx(var_int, rel=0.25)


class TestWallTimeModel:
    def test_identity(self):
        assert simulated_wall_time(0, 0, 1.5, OverheadModel()) == 1.5

    def test_single_sweep_costs(self):
        overheads = OverheadModel(0.05, 0.2)
        assert simulated_wall_time(1, 1, 2.0, overheads) == pytest.approx(2.25)

    def test_per_point_loop_costs(self):
        overheads = OverheadModel(0.05, 0.2)
        n = 100
        assert simulated_wall_time(n, n, 3.0, overheads) == pytest.approx(3.0 + n * 0.25)

    def test_affine_in_each_argument(self):
        overheads = OverheadModel(0.03, 0.11)
        base = simulated_wall_time(5, 7, 1.0, overheads)
        assert simulated_wall_time(6, 7, 1.0, overheads) - base == pytest.approx(0.11)
        assert simulated_wall_time(5, 8, 1.0, overheads) - base == pytest.approx(0.03)
        assert simulated_wall_time(5, 7, 2.5, overheads) - base == pytest.approx(1.5)


class TestClassify:
    def test_blob_centers_separate(self):
        disc = fit_discriminator((1.0, 0.0), (-1.0, 0.0))
        assert classify(-1.0, 0.0, disc) == 1
        assert classify(1.0, 0.0, disc) == 0

    def test_tie_goes_to_ground(self):
        disc = Discriminator(angle=0.0, threshold=0.25)
        assert classify(0.25, 123.0, disc) == 0

    def test_fidelity_matches_gaussian_overlap(self, profile):
        # oracle: invert F = 1 - erfc(d / (2 sqrt(2) sigma)) / 2 for F = 0.95
        separation_over_sigma = 2.0 * math.sqrt(2.0) * erfcinv(2.0 * (1.0 - 0.95))
        assert separation_over_sigma == pytest.approx(3.29, abs=0.01)
        sigma = 2.0 / separation_over_sigma  # blob centers are 2 apart
        rng = np.random.default_rng(17)
        n = 5000
        cloud0 = rng.normal((1.0, 0.0), sigma, size=(n, 2))
        cloud1 = rng.normal((-1.0, 0.0), sigma, size=(n, 2))
        disc = fit_discriminator((1.0, 0.0), (-1.0, 0.0))
        errors0 = classify(cloud0[:, 0], cloud0[:, 1], disc).mean()
        hits1 = classify(cloud1[:, 0], cloud1[:, 1], disc).mean()
        fidelity = ((1 - errors0) + hits1) / 2.0
        assert fidelity == pytest.approx(0.95, abs=0.02)


class TestModelFile:
    def test_round_trip(self, tmp_path, model):
        path = tmp_path / "model.json"
        write_model(model, path)
        assert load_model(path) == model

    def test_strict_keys(self, tmp_path, model):
        path = tmp_path / "model.json"
        write_model(model, path)
        text = path.read_text().replace('"t1"', '"t_one"')
        path.write_text(text)
        with pytest.raises(ValueError, match="missing model key 't1'"):
            load_model(path)

    def test_invariants_enforced(self):
        with pytest.raises(ValueError, match="t2"):
            QubitModel(
                resonator_frequency=5.5e9,
                resonator_linewidth=1e6,
                dispersive_shift=0.5e6,
                qubit_frequency_max=5e9,
                flux_offset=0.0,
                flux_period=1.0,
                pi_amplitude=0.5,
                reference_duration=40e-9,
                t1=10e-6,
                t2=30e-6,
                state0_center=(1.0, 0.0),
                state1_center=(-1.0, 0.0),
                blob_sigma=0.1,
            )

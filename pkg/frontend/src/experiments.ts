/**
 * Experiment request builders.
 *
 * These mirror the server-side benchmark templates request-for-request:
 * same defaults, same field order, same arithmetic (plain IEEE-754 ops in a
 * fixed order), so the serialized payloads are byte-identical with the
 * reference builders.  Conformance is pinned by golden/templates/.
 */

import type { ExperimentRequest, Pulse, Qubit } from './types.js';

export type ExperimentKind =
  | 'resonator_spectroscopy'
  | 'qubit_spectroscopy'
  | 'rabi_amplitude'
  | 'rabi_length'
  | 't1'
  | 'ramsey_detuned'
  | 'singleshot'
  | 'flux_map';

export type Params = Record<string, number | boolean>;

const COMMON: Params = {
  reps: 4096,
  average: true,
  readout_frequency: 5.5e9,
  readout_amplitude: 0.5,
  readout_duration: 1e-6,
  readout_dac: 0,
  readout_adc: 0,
  drive_dac: 1,
};

const DEFAULTS: Record<ExperimentKind, Params> = {
  resonator_spectroscopy: {
    points: 101,
    frequency_start: 5.495e9,
    frequency_stop: 5.505e9,
    relaxation: 5e-6,
  },
  qubit_spectroscopy: {
    points: 101,
    frequency_start: 4.995e9,
    frequency_stop: 5.005e9,
    drive_amplitude: 0.02,
    drive_duration: 1e-6,
    relaxation: 5e-6,
  },
  rabi_amplitude: {
    points: 101,
    amplitude_start: 0.0,
    amplitude_stop: 1.0,
    drive_frequency: 5.0e9,
    drive_duration: 4e-8,
    relaxation: 300e-6,
  },
  rabi_length: {
    points: 41,
    duration_start: 4e-9,
    duration_stop: 2e-7,
    drive_frequency: 5.0e9,
    drive_amplitude: 0.5,
    relaxation: 300e-6,
  },
  t1: {
    points: 41,
    delay_start: 0.0,
    delay_stop: 5e-5,
    pi_amplitude: 0.5,
    pi_duration: 4e-8,
    drive_frequency: 5.0e9,
    relaxation: 300e-6,
  },
  ramsey_detuned: {
    points: 41,
    delay_start: 0.0,
    delay_stop: 3e-5,
    detuning: 2e5,
    half_pi_amplitude: 0.25,
    pulse_duration: 4e-8,
    drive_frequency: 5.0e9,
    relaxation: 300e-6,
  },
  singleshot: {
    reps: 5000,
    average: false,
    pi_amplitude: 0.5,
    pi_duration: 4e-8,
    drive_frequency: 5.0e9,
    relaxation: 300e-6,
  },
  flux_map: {
    points: 36,
    frequency_start: 4.7e9,
    frequency_stop: 5.05e9,
    bias_points: 5,
    bias_start: -0.1,
    bias_stop: 0.1,
    drive_amplitude: 0.02,
    drive_duration: 1e-6,
    flux_dac: 2,
    relaxation: 5e-6,
  },
};

export function defaultParams(kind: ExperimentKind): Params {
  return { ...COMMON, ...DEFAULTS[kind] };
}

/** Endpoint-inclusive linear spacing with pinned float arithmetic. */
export function sweepPoints(start: number, stop: number, n: number): number[] {
  if (n === 1) {
    return [start];
  }
  const step = (stop - start) / (n - 1);
  const values: number[] = [];
  for (let k = 0; k < n; k += 1) {
    values.push(start + k * step);
  }
  values[n - 1] = stop;
  return values;
}

function num(params: Params, key: string): number {
  const value = params[key];
  if (typeof value !== 'number') {
    throw new Error(`parameter '${key}' must be a number`);
  }
  return value;
}

function cfg(params: Params) {
  return {
    reps: num(params, 'reps'),
    softAvgs: 1,
    repetitionDuration: num(params, 'relaxation'),
    average: Boolean(params.average),
  };
}

function readout(params: Params, start: number, frequency?: number): Pulse {
  return {
    kind: 'readout',
    shape: { name: 'rectangular' },
    frequency: frequency === undefined ? num(params, 'readout_frequency') : frequency,
    amplitude: num(params, 'readout_amplitude'),
    relativePhase: 0.0,
    start,
    duration: num(params, 'readout_duration'),
    dac: num(params, 'readout_dac'),
    adc: num(params, 'readout_adc'),
    name: 'ro',
  };
}

function drive(
  params: Params,
  frequency: number,
  amplitude: number,
  start: number,
  duration: number,
  phase = 0.0,
  name = 'd0',
): Pulse {
  return {
    kind: 'drive',
    shape: { name: 'rectangular' },
    frequency,
    amplitude,
    relativePhase: phase,
    start,
    duration,
    dac: num(params, 'drive_dac'),
    adc: null,
    name,
  };
}

const NO_QUBIT: Qubit[] = [{ bias: null, dac: null }];

/** The ordered list of requests this experiment sends to the server. */
export function experimentRequests(
  kind: ExperimentKind,
  params: Params,
): ExperimentRequest[] {
  const config = cfg(params);

  if (kind === 'resonator_spectroscopy') {
    return sweepPoints(
      num(params, 'frequency_start'),
      num(params, 'frequency_stop'),
      num(params, 'points'),
    ).map((frequency) => ({
      operationCode: 'EXECUTE_PULSE_SEQUENCE' as const,
      cfg: config,
      sequence: [readout(params, 0.0, frequency)],
      qubits: NO_QUBIT,
      sweepers: [],
    }));
  }

  if (kind === 'qubit_spectroscopy') {
    return [
      {
        operationCode: 'EXECUTE_SWEEPS',
        cfg: config,
        sequence: [
          drive(
            params,
            num(params, 'frequency_start'),
            num(params, 'drive_amplitude'),
            0.0,
            num(params, 'drive_duration'),
          ),
          readout(params, num(params, 'drive_duration')),
        ],
        qubits: NO_QUBIT,
        sweepers: [
          {
            parameters: ['frequency'],
            indexes: [0],
            starts: [num(params, 'frequency_start')],
            stops: [num(params, 'frequency_stop')],
            expts: num(params, 'points'),
          },
        ],
      },
    ];
  }

  if (kind === 'rabi_amplitude') {
    return [
      {
        operationCode: 'EXECUTE_SWEEPS',
        cfg: config,
        sequence: [
          drive(
            params,
            num(params, 'drive_frequency'),
            num(params, 'amplitude_start'),
            0.0,
            num(params, 'drive_duration'),
          ),
          readout(params, num(params, 'drive_duration')),
        ],
        qubits: NO_QUBIT,
        sweepers: [
          {
            parameters: ['amplitude'],
            indexes: [0],
            starts: [num(params, 'amplitude_start')],
            stops: [num(params, 'amplitude_stop')],
            expts: num(params, 'points'),
          },
        ],
      },
    ];
  }

  if (kind === 'rabi_length') {
    return sweepPoints(
      num(params, 'duration_start'),
      num(params, 'duration_stop'),
      num(params, 'points'),
    ).map((duration) => ({
      operationCode: 'EXECUTE_PULSE_SEQUENCE' as const,
      cfg: config,
      sequence: [
        drive(
          params,
          num(params, 'drive_frequency'),
          num(params, 'drive_amplitude'),
          0.0,
          duration,
        ),
        readout(params, duration),
      ],
      qubits: NO_QUBIT,
      sweepers: [],
    }));
  }

  if (kind === 't1') {
    const readoutStart = num(params, 'pi_duration') + num(params, 'delay_start');
    return [
      {
        operationCode: 'EXECUTE_SWEEPS',
        cfg: config,
        sequence: [
          drive(
            params,
            num(params, 'drive_frequency'),
            num(params, 'pi_amplitude'),
            0.0,
            num(params, 'pi_duration'),
          ),
          readout(params, readoutStart),
        ],
        qubits: NO_QUBIT,
        sweepers: [
          {
            parameters: ['start'],
            indexes: [1],
            starts: [readoutStart],
            stops: [num(params, 'pi_duration') + num(params, 'delay_stop')],
            expts: num(params, 'points'),
          },
        ],
      },
    ];
  }

  if (kind === 'ramsey_detuned') {
    const duration = num(params, 'pulse_duration');
    return sweepPoints(
      num(params, 'delay_start'),
      num(params, 'delay_stop'),
      num(params, 'points'),
    ).map((delay) => {
      const secondStart = duration + delay;
      const readoutStart = secondStart + duration;
      const phase = 2.0 * Math.PI * num(params, 'detuning') * delay;
      return {
        operationCode: 'EXECUTE_PULSE_SEQUENCE' as const,
        cfg: config,
        sequence: [
          drive(
            params,
            num(params, 'drive_frequency'),
            num(params, 'half_pi_amplitude'),
            0.0,
            duration,
            0.0,
            'd0',
          ),
          drive(
            params,
            num(params, 'drive_frequency'),
            num(params, 'half_pi_amplitude'),
            secondStart,
            duration,
            phase,
            'd1',
          ),
          readout(params, readoutStart),
        ],
        qubits: NO_QUBIT,
        sweepers: [],
      };
    });
  }

  if (kind === 'singleshot') {
    const ground: ExperimentRequest = {
      operationCode: 'EXECUTE_PULSE_SEQUENCE',
      cfg: config,
      sequence: [readout(params, 0.0)],
      qubits: NO_QUBIT,
      sweepers: [],
    };
    const excited: ExperimentRequest = {
      operationCode: 'EXECUTE_PULSE_SEQUENCE',
      cfg: config,
      sequence: [
        drive(
          params,
          num(params, 'drive_frequency'),
          num(params, 'pi_amplitude'),
          0.0,
          num(params, 'pi_duration'),
        ),
        readout(params, num(params, 'pi_duration')),
      ],
      qubits: NO_QUBIT,
      sweepers: [],
    };
    return [ground, excited];
  }

  if (kind === 'flux_map') {
    return [
      {
        operationCode: 'EXECUTE_SWEEPS',
        cfg: config,
        sequence: [
          drive(
            params,
            num(params, 'frequency_start'),
            num(params, 'drive_amplitude'),
            0.0,
            num(params, 'drive_duration'),
          ),
          readout(params, num(params, 'drive_duration')),
        ],
        qubits: [{ bias: num(params, 'bias_start'), dac: num(params, 'flux_dac') }],
        sweepers: [
          {
            parameters: ['bias'],
            indexes: [0],
            starts: [num(params, 'bias_start')],
            stops: [num(params, 'bias_stop')],
            expts: num(params, 'bias_points'),
          },
          {
            parameters: ['frequency'],
            indexes: [0],
            starts: [num(params, 'frequency_start')],
            stops: [num(params, 'frequency_stop')],
            expts: num(params, 'points'),
          },
        ],
      },
    ];
  }

  throw new Error(`unknown experiment kind '${kind}'`);
}

/** Build one experiment with defaults merged in. */
export function buildExperiment(
  kind: ExperimentKind,
  overrides: Params = {},
): ExperimentRequest[] {
  return experimentRequests(kind, { ...defaultParams(kind), ...overrides });
}

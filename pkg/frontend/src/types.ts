/**
 * Experiment components mirrored from the server's component model.
 * Field names are camelCase here; the wire encoder maps them to the
 * canonical snake_case JSON schema.
 */

export type OperationCode =
  | 'EXECUTE_PULSE_SEQUENCE'
  | 'EXECUTE_PULSE_SEQUENCE_RAW'
  | 'EXECUTE_SWEEPS';

export type PulseKind = 'drive' | 'readout' | 'flux';

export type ParameterName =
  | 'frequency'
  | 'amplitude'
  | 'relative_phase'
  | 'start'
  | 'duration'
  | 'bias';

export type PulseShape =
  | { name: 'rectangular' }
  | { name: 'gaussian'; relSigma: number }
  | { name: 'drag'; relSigma: number; beta: number }
  | { name: 'arbitrary'; iSamples: number[]; qSamples: number[] };

export interface Pulse {
  kind: PulseKind;
  shape: PulseShape;
  frequency: number; // Hz
  amplitude: number; // DAC full-scale fraction, [-1, 1]
  relativePhase: number; // radians
  start: number; // s, absolute from the sequence origin
  duration: number; // s
  dac: number;
  adc: number | null; // required iff kind === 'readout'
  name: string;
}

export interface Config {
  reps: number;
  softAvgs: number;
  repetitionDuration: number; // s
  average: boolean;
}

export interface Qubit {
  bias: number | null;
  dac: number | null;
}

export interface Sweeper {
  parameters: ParameterName[];
  indexes: number[];
  starts: number[];
  stops: number[];
  expts: number;
}

export interface ExperimentRequest {
  operationCode: OperationCode;
  cfg: Config;
  sequence: Pulse[];
  qubits: Qubit[];
  sweepers: Sweeper[];
}

/** Nested i/q arrays; nesting depth depends on the operation mode. */
export interface AcquisitionResult {
  i: unknown[];
  q: unknown[];
}

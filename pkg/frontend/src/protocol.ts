/**
 * Wire protocol: canonical request encoding, 4-byte big-endian length
 * framing, and response decoding.
 *
 * Requests are serialized field by field in the canonical key order so the
 * output is byte-identical with the server's own codec (checked against the
 * fixtures in golden/).
 */

import { floatText, intText, stringText } from './format.js';
import type {
  AcquisitionResult,
  ExperimentRequest,
  Pulse,
  PulseShape,
  Qubit,
  Sweeper,
} from './types.js';

export const HEADER_BYTES = 4;
export const MAX_PAYLOAD = 0xffffffff;

export class WireError extends Error {}

/** Error envelope returned by the server; message passed through verbatim. */
export class ServerReplyError extends Error {}

function floatArray(values: number[]): string {
  return '[' + values.map(floatText).join(',') + ']';
}

function shapeText(shape: PulseShape): string {
  switch (shape.name) {
    case 'rectangular':
      return '{"name":"rectangular"}';
    case 'gaussian':
      return `{"name":"gaussian","rel_sigma":${floatText(shape.relSigma)}}`;
    case 'drag':
      return (
        `{"name":"drag","rel_sigma":${floatText(shape.relSigma)}` +
        `,"beta":${floatText(shape.beta)}}`
      );
    case 'arbitrary':
      return (
        `{"name":"arbitrary","i_samples":${floatArray(shape.iSamples)}` +
        `,"q_samples":${floatArray(shape.qSamples)}}`
      );
  }
}

function pulseText(pulse: Pulse): string {
  const adc = pulse.adc === null ? 'null' : intText(pulse.adc);
  return (
    `{"kind":${stringText(pulse.kind)}` +
    `,"shape":${shapeText(pulse.shape)}` +
    `,"frequency":${floatText(pulse.frequency)}` +
    `,"amplitude":${floatText(pulse.amplitude)}` +
    `,"relative_phase":${floatText(pulse.relativePhase)}` +
    `,"start":${floatText(pulse.start)}` +
    `,"duration":${floatText(pulse.duration)}` +
    `,"dac":${intText(pulse.dac)}` +
    `,"adc":${adc}` +
    `,"name":${stringText(pulse.name)}}`
  );
}

function qubitText(qubit: Qubit): string {
  const bias = qubit.bias === null ? 'null' : floatText(qubit.bias);
  const dac = qubit.dac === null ? 'null' : intText(qubit.dac);
  return `{"bias":${bias},"dac":${dac}}`;
}

function sweeperText(sweeper: Sweeper): string {
  return (
    `{"parameters":[${sweeper.parameters.map(stringText).join(',')}]` +
    `,"indexes":[${sweeper.indexes.map(intText).join(',')}]` +
    `,"starts":${floatArray(sweeper.starts)}` +
    `,"stops":${floatArray(sweeper.stops)}` +
    `,"expts":${intText(sweeper.expts)}}`
  );
}

/** Canonical UTF-8 JSON payload for one request. */
export function encodeRequest(request: ExperimentRequest): Buffer {
  const cfg = request.cfg;
  const text =
    `{"operation_code":${stringText(request.operationCode)}` +
    `,"cfg":{"reps":${intText(cfg.reps)}` +
    `,"soft_avgs":${intText(cfg.softAvgs)}` +
    `,"repetition_duration":${floatText(cfg.repetitionDuration)}` +
    `,"average":${cfg.average ? 'true' : 'false'}}` +
    `,"sequence":[${request.sequence.map(pulseText).join(',')}]` +
    `,"qubits":[${request.qubits.map(qubitText).join(',')}]` +
    `,"sweepers":[${request.sweepers.map(sweeperText).join(',')}]}`;
  return Buffer.from(text, 'utf-8');
}

/** Prefix a payload with its 4-byte big-endian length. */
export function frameWrite(payload: Buffer): Buffer {
  if (payload.length === 0) {
    throw new WireError('empty frame');
  }
  if (payload.length > MAX_PAYLOAD) {
    throw new WireError('payload too large for 32-bit length header');
  }
  const header = Buffer.alloc(HEADER_BYTES);
  header.writeUInt32BE(payload.length, 0);
  return Buffer.concat([header, payload]);
}

/**
 * Incremental frame assembly for a streamed response.  Feed chunks as they
 * arrive; `payload` returns the complete frame body once available.
 */
export class FrameReader {
  private buffer: Buffer = Buffer.alloc(0);

  feed(chunk: Buffer): void {
    this.buffer = Buffer.concat([this.buffer, chunk]);
  }

  payload(): Buffer | null {
    if (this.buffer.length < HEADER_BYTES) {
      return null;
    }
    const length = this.buffer.readUInt32BE(0);
    if (length === 0) {
      throw new WireError('empty frame');
    }
    if (this.buffer.length < HEADER_BYTES + length) {
      return null;
    }
    return this.buffer.subarray(HEADER_BYTES, HEADER_BYTES + length);
  }
}

/** Decode a response payload; error envelopes raise ServerReplyError. */
export function decodeResults(payload: Buffer): AcquisitionResult {
  let parsed: unknown;
  try {
    parsed = JSON.parse(payload.toString('utf-8'));
  } catch (error) {
    throw new WireError(`malformed response JSON: ${String(error)}`);
  }
  if (typeof parsed !== 'object' || parsed === null) {
    throw new WireError('response: expected an object');
  }
  const envelope = parsed as Record<string, unknown>;
  if (envelope.status === 'error') {
    if (typeof envelope.message !== 'string') {
      throw new WireError('error envelope without message');
    }
    throw new ServerReplyError(envelope.message);
  }
  if (envelope.status !== 'ok') {
    throw new WireError(`unknown response status '${String(envelope.status)}'`);
  }
  if (!Array.isArray(envelope.i) || !Array.isArray(envelope.q)) {
    throw new WireError('ok envelope without i/q arrays');
  }
  return { i: envelope.i, q: envelope.q };
}

export * from './types.js';
export { floatText, intText, stringText } from './format.js';
export {
  FrameReader,
  HEADER_BYTES,
  ServerReplyError,
  WireError,
  decodeResults,
  encodeRequest,
  frameWrite,
} from './protocol.js';
export { ConnectionError, execute, session } from './client.js';
export type { ClientSession } from './client.js';
export {
  buildExperiment,
  defaultParams,
  experimentRequests,
  sweepPoints,
} from './experiments.js';
export type { ExperimentKind, Params } from './experiments.js';

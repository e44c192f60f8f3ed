/**
 * Minimal TCP client: one framed request per connection, one framed
 * response back, then the server closes the socket.
 */

import * as net from 'node:net';

import {
  FrameReader,
  ServerReplyError,
  WireError,
  decodeResults,
  encodeRequest,
  frameWrite,
} from './protocol.js';
import type { AcquisitionResult, ExperimentRequest } from './types.js';

export interface ClientSession {
  host: string;
  port: number;
  timeoutMs: number;
}

export class ConnectionError extends Error {}

export function session(host: string, port: number, timeoutMs = 60_000): ClientSession {
  if (timeoutMs <= 0) {
    throw new Error('timeoutMs must be > 0');
  }
  return { host, port, timeoutMs };
}

/** Execute one request; resolves with the results or rejects with the
 * server's error message (ServerReplyError) / transport failures. */
export function execute(
  clientSession: ClientSession,
  request: ExperimentRequest,
): Promise<AcquisitionResult> {
  const framed = frameWrite(encodeRequest(request));
  return new Promise((resolve, reject) => {
    const reader = new FrameReader();
    let settled = false;
    const socket = net.createConnection({
      host: clientSession.host,
      port: clientSession.port,
    });
    socket.setTimeout(clientSession.timeoutMs);

    const fail = (error: Error) => {
      if (!settled) {
        settled = true;
        socket.destroy();
        reject(error);
      }
    };

    socket.on('connect', () => {
      socket.write(framed);
    });
    socket.on('data', (chunk) => {
      reader.feed(chunk);
      let payload: Buffer | null = null;
      try {
        payload = reader.payload();
      } catch (error) {
        fail(error as Error);
        return;
      }
      if (payload === null || settled) {
        return;
      }
      settled = true;
      socket.end();
      try {
        resolve(decodeResults(payload));
      } catch (error) {
        reject(error);
      }
    });
    socket.on('timeout', () => fail(new ConnectionError('request timed out')));
    socket.on('error', (error) => fail(new ConnectionError(error.message)));
    socket.on('close', () => fail(new WireError('connection closed before a full response')));
  });
}

export { ServerReplyError, WireError };

"""Minimal client side of the wire protocol: one request per connection."""

from __future__ import annotations

import socket

from rfpulse.components import AcquisitionResult, ExperimentRequest
from rfpulse.wire import decode_results, encode_request, frame_read, frame_write

__all__ = ["ServerReplyError", "send_request"]


class ServerReplyError(RuntimeError):
    """The server answered with an error envelope; message passed through."""


def send_request(
    host: str, port: int, request: ExperimentRequest, timeout: float = 60.0
) -> AcquisitionResult:
    """Open a connection, send one framed request, return the decoded results."""
    payload = encode_request(request)
    with socket.create_connection((host, port), timeout=timeout) as sock:
        sock.sendall(frame_write(payload))
        reply = frame_read(sock.recv)
    envelope = decode_results(reply)
    if envelope.status == "error":
        raise ServerReplyError(envelope.message)
    assert envelope.result is not None
    return envelope.result

"""Long-lived TCP service owning one backend instance across connections.

Connections are handled strictly one at a time; extra clients wait in the
accept queue.  The backend (and with it the converter clock phase) is created
once at startup and reused for every connection, so phase-sensitive
experiments stay coherent for the lifetime of the server.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import time
from dataclasses import dataclass, field

from rfpulse import programs
from rfpulse.backend_sim import (
    BOARD_PROFILES,
    DEFAULT_MODEL,
    BackendState,
    OverheadModel,
    init_backend,
    load_model,
)
from rfpulse.components import (
    AcquisitionResult,
    ExperimentRequest,
    OperationCode,
    validate_request,
)
from rfpulse.wire import (
    CodecError,
    FramingError,
    ResponseEnvelope,
    decode_request,
    encode_results,
    frame_read,
    frame_write,
)

__all__ = [
    "ServerConfig",
    "ServerError",
    "RequestError",
    "RequestRecord",
    "ExperimentServer",
    "dispatch",
    "serve",
]

logger = logging.getLogger("rfpulse.server")


class ServerError(Exception):
    """Startup failure: bad configuration, bind error, unloadable model."""


class RequestError(Exception):
    """A structurally valid request that cannot be dispatched."""


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 6543
    board: str = "ZCU216"
    model_path: str | None = None  # None -> built-in default model
    seed: int | None = None
    connection_overhead: float = 0.05  # s, wall-time model
    program_load_overhead: float = 0.2  # s
    read_timeout: float = 30.0  # s, per-connection
    max_frame_bytes: int = 64 * 1024 * 1024
    log_level: str = "INFO"

    def validate(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ServerError(f"port must be in 1..65535, got {self.port}")
        if self.board not in BOARD_PROFILES:
            raise ServerError(
                f"unknown board '{self.board}', expected one of {sorted(BOARD_PROFILES)}"
            )
        if self.read_timeout <= 0:
            raise ServerError("read_timeout must be > 0")


@dataclass
class RequestRecord:
    """One executed request, for logs and benchmark accounting."""

    operation: str
    points: int
    hardware_seconds: float
    wall_seconds: float
    started: float
    finished: float
    status: str


def dispatch(request: ExperimentRequest, backend: BackendState) -> AcquisitionResult:
    """Route a validated request to its executor."""
    operation = request.operation_code
    if operation is OperationCode.EXECUTE_SWEEPS:
        if not request.sweepers:
            raise RequestError("sweeps operation requires sweepers")
        schedule = programs.compile(request, backend.profile)
        return programs.execute_sweeps(request, schedule, backend)
    if request.sweepers:
        raise RequestError("sequence operation takes no sweepers")
    schedule = programs.compile(request, backend.profile)
    if operation is OperationCode.EXECUTE_PULSE_SEQUENCE_RAW:
        return programs.execute_raw(schedule, request.cfg, backend)
    return programs.execute_sequence(schedule, request.cfg, backend)


def _point_count(request: ExperimentRequest) -> int:
    total = 1
    for sw in request.sweepers:
        total *= sw.expts
    return total


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:  # one frame in, one frame out, then close
        server: ExperimentServer = self.server  # type: ignore[assignment]
        sock: socket.socket = self.request
        sock.settimeout(server.config.read_timeout)
        try:
            payload = frame_read(sock.recv, max_length=server.config.max_frame_bytes)
        except FramingError as exc:
            self._respond(ResponseEnvelope.error(str(exc)))
            return
        except socket.timeout:
            self._respond(ResponseEnvelope.error("read timeout"))
            return
        except OSError as exc:
            logger.warning("connection failed while reading: %s", exc)
            return

        try:
            request = decode_request(payload)
        except CodecError as exc:
            self._respond(ResponseEnvelope.error(f"malformed request: {exc}"))
            return

        server_backend = server.backend
        violations = validate_request(request, server_backend.profile)
        if violations:
            self._respond(ResponseEnvelope.error("invalid request: " + "; ".join(violations)))
            return

        started = time.monotonic()
        hardware_before = server_backend.simulated_seconds
        try:
            result = dispatch(request, server_backend)
            envelope = ResponseEnvelope.ok(result)
            status = "ok"
        except (programs.CompileError, programs.ExecutionError, RequestError) as exc:
            envelope = ResponseEnvelope.error(str(exc))
            status = "error"
        except Exception as exc:  # never let a request kill the server
            logger.exception("unexpected failure while executing request")
            envelope = ResponseEnvelope.error(f"internal error: {exc}")
            status = "error"
        finished = time.monotonic()

        record = RequestRecord(
            operation=request.operation_code.value,
            points=_point_count(request),
            hardware_seconds=server_backend.simulated_seconds - hardware_before,
            wall_seconds=finished - started,
            started=started,
            finished=finished,
            status=status,
        )
        server.history.append(record)
        logger.info(
            "op=%s points=%d hardware_s=%.6g wall_s=%.6g status=%s",
            record.operation,
            record.points,
            record.hardware_seconds,
            record.wall_seconds,
            record.status,
        )
        self._respond(envelope)

    def _respond(self, envelope: ResponseEnvelope) -> None:
        try:
            self.request.sendall(frame_write(encode_results(envelope)))
        except OSError as exc:
            logger.warning("dropping connection, response write failed: %s", exc)


class ExperimentServer(socketserver.TCPServer):
    """Sequential TCP server bound to one simulated backend.

    ``socketserver.TCPServer`` handles one request at a time, which is
    exactly the execution ordering this service guarantees.
    """

    allow_reuse_address = True
    request_queue_size = 32

    def __init__(self, config: ServerConfig):
        config.validate()
        if config.model_path is None:
            model = DEFAULT_MODEL
        else:
            try:
                model = load_model(config.model_path)
            except (OSError, ValueError) as exc:
                raise ServerError(f"cannot load model file: {exc}") from exc
        profile = BOARD_PROFILES[config.board]
        overheads = OverheadModel(
            connection_overhead=config.connection_overhead,
            program_load_overhead=config.program_load_overhead,
        )
        self.config = config
        self.backend = init_backend(model, profile, seed=config.seed, overheads=overheads)
        self.history: list[RequestRecord] = []
        try:
            super().__init__((config.host, config.port), _Handler)
        except OSError as exc:
            raise ServerError(f"cannot bind {config.host}:{config.port}: {exc}") from exc
        logger.info(
            "listening on %s:%d board=%s seed=%s",
            config.host,
            config.port,
            config.board,
            config.seed,
        )


def serve(config: ServerConfig) -> None:
    """Run the server until interrupted; blocks the calling thread."""
    logging.basicConfig(
        level=getattr(logging, config.log_level.upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    with ExperimentServer(config) as server:
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            logger.info("interrupted, shutting down")

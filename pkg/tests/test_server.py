"""Server lifecycle, dispatch contracts and robustness."""

import math
import random
import socket
import threading
import time

import pytest

from rfpulse.backend_sim import BOARD_PROFILES, init_backend
from rfpulse.bench.client import ServerReplyError, send_request
from rfpulse.components import (
    Config,
    ExperimentRequest,
    OperationCode,
    Parameter,
    Qubit,
    Sweeper,
)
from rfpulse.server import RequestError, ServerConfig, ServerError, dispatch
from rfpulse.wire import decode_results, encode_request, frame_read, frame_write

from conftest import minimal_request, running_server, simple_drive, simple_readout


def _raw_exchange(port: int, data: bytes, read_reply: bool = True) -> bytes | None:
    with socket.create_connection(("127.0.0.1", port), timeout=10) as sock:
        sock.sendall(data)
        if not read_reply:
            return None
        return frame_read(sock.recv)


class TestServerConfig:
    def test_port_zero_rejected(self):
        with pytest.raises(ServerError, match="port"):
            ServerConfig(port=0).validate()

    def test_unknown_board_rejected(self):
        with pytest.raises(ServerError, match="unknown board"):
            ServerConfig(board="ZCU999").validate()

    def test_bad_model_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("[]")
        from rfpulse.server import ExperimentServer

        with pytest.raises(ServerError, match="cannot load model"):
            ExperimentServer(ServerConfig(port=1, model_path=str(path)))


class TestDispatch:
    def test_sweeps_without_sweepers(self, model, zcu216):
        backend = init_backend(model, zcu216, seed=0)
        request = ExperimentRequest(
            OperationCode.EXECUTE_SWEEPS, Config(), (simple_readout(),), (Qubit(),)
        )
        with pytest.raises(RequestError, match="sweeps operation requires sweepers"):
            dispatch(request, backend)

    def test_sequence_with_sweepers(self, model, zcu216):
        backend = init_backend(model, zcu216, seed=0)
        sweeper = Sweeper((Parameter.AMPLITUDE,), (0,), (0.0,), (1.0,), 3)
        request = ExperimentRequest(
            OperationCode.EXECUTE_PULSE_SEQUENCE,
            Config(),
            (simple_readout(),),
            (Qubit(),),
            (sweeper,),
        )
        with pytest.raises(RequestError, match="sequence operation takes no sweepers"):
            dispatch(request, backend)

    def test_each_code_reaches_its_executor(self, model, zcu216, monkeypatch):
        from rfpulse import programs

        calls = []
        originals = {
            "sequence": programs.execute_sequence,
            "raw": programs.execute_raw,
            "sweeps": programs.execute_sweeps,
        }

        def tracked(name):
            def wrapper(*args, **kwargs):
                calls.append(name)
                return originals[name](*args, **kwargs)

            return wrapper

        monkeypatch.setattr(programs, "execute_sequence", tracked("sequence"))
        monkeypatch.setattr(programs, "execute_raw", tracked("raw"))
        monkeypatch.setattr(programs, "execute_sweeps", tracked("sweeps"))
        backend = init_backend(model, zcu216, seed=0)
        base = minimal_request(reps=2)
        dispatch(base, backend)
        from dataclasses import replace

        dispatch(replace(base, operation_code=OperationCode.EXECUTE_PULSE_SEQUENCE_RAW), backend)
        sweeper = Sweeper((Parameter.AMPLITUDE,), (0,), (0.1,), (0.5,), 2)
        dispatch(
            replace(base, operation_code=OperationCode.EXECUTE_SWEEPS, sweepers=(sweeper,)),
            backend,
        )
        assert calls == ["sequence", "raw", "sweeps"]


class TestConnectionLifecycle:
    def test_happy_path(self):
        with running_server(seed=0) as server:
            port = server.server_address[1]
            result = send_request("127.0.0.1", port, minimal_request(reps=4))
            assert len(result.i) == 1

    def test_exactly_one_response_then_close(self):
        with running_server(seed=0) as server:
            port = server.server_address[1]
            payload = encode_request(minimal_request(reps=2))
            with socket.create_connection(("127.0.0.1", port), timeout=10) as sock:
                sock.sendall(frame_write(payload))
                frame_read(sock.recv)
                assert sock.recv(1) == b""  # server closed after one response

    def test_unsupported_sweeper_error_envelope(self):
        with running_server(seed=0) as server:
            port = server.server_address[1]
            sweeper = Sweeper((Parameter.DURATION,), (0,), (1e-8,), (1e-7,), 3)
            request = ExperimentRequest(
                OperationCode.EXECUTE_SWEEPS,
                Config(reps=2),
                (simple_drive(), simple_readout(start=5e-8)),
                (Qubit(),),
                (sweeper,),
            )
            with pytest.raises(ServerReplyError, match="unsupported sweeper parameter"):
                send_request("127.0.0.1", port, request)

    def test_garbage_payload_gets_error_envelope(self):
        with running_server(seed=0) as server:
            port = server.server_address[1]
            reply = _raw_exchange(port, frame_write(b"\x01\x02garbage"))
            envelope = decode_results(reply)
            assert envelope.status == "error"
            assert "malformed request" in envelope.message

    def test_invalid_request_names_violation(self):
        with running_server(seed=0) as server:
            port = server.server_address[1]
            bad = minimal_request(reps=0)
            with pytest.raises(ServerReplyError, match="reps"):
                send_request("127.0.0.1", port, bad)

    def test_truncated_frame_error(self):
        with running_server(seed=0) as server:
            port = server.server_address[1]
            with socket.create_connection(("127.0.0.1", port), timeout=10) as sock:
                sock.sendall(b"\x00\x00\x00\xff123")
                sock.shutdown(socket.SHUT_WR)
                reply = frame_read(sock.recv)
            envelope = decode_results(reply)
            assert envelope.status == "error"
            assert "truncated" in envelope.message


class TestExecutionOrdering:
    def test_overlapping_clients_serialized(self):
        with running_server(seed=0) as server:
            port = server.server_address[1]
            slow = ExperimentRequest(
                OperationCode.EXECUTE_SWEEPS,
                Config(reps=512),
                (simple_drive(), simple_readout(start=5e-8)),
                (Qubit(),),
                (Sweeper((Parameter.AMPLITUDE,), (0,), (0.0,), (1.0,), 60),),
            )
            fast = minimal_request(reps=3, average=False)
            outcomes: dict[str, object] = {}

            def run_slow():
                outcomes["slow"] = send_request("127.0.0.1", port, slow, timeout=60)

            def run_fast():
                time.sleep(0.05)  # connect while the sweep is executing
                outcomes["fast"] = send_request("127.0.0.1", port, fast, timeout=60)

            threads = [threading.Thread(target=run_slow), threading.Thread(target=run_fast)]
            for t in threads:
                t.start()
            for t in threads:
                t.join(timeout=60)
            assert len(outcomes["slow"].i[0]) == 60
            assert len(outcomes["fast"].i[0]) == 3
            # executions never interleave: records are disjoint in time
            records = server.history
            assert len(records) == 2
            first, second = sorted(records, key=lambda r: r.started)
            assert first.finished <= second.started

    def test_clock_phase_constant_across_connections(self, noiseless_model, tmp_path):
        from rfpulse.backend_sim import write_model

        path = tmp_path / "noiseless.json"
        write_model(noiseless_model, path)
        with running_server(seed=5, model_path=str(path)) as server:
            port = server.server_address[1]
            first = send_request("127.0.0.1", port, minimal_request(reps=1))
            second = send_request("127.0.0.1", port, minimal_request(reps=1))
            angle1 = math.atan2(first.q[0], first.i[0])
            angle2 = math.atan2(second.q[0], second.i[0])
            assert angle1 == angle2

    def test_restart_with_new_seed_changes_phase(self, noiseless_model, tmp_path):
        from rfpulse.backend_sim import write_model

        path = tmp_path / "noiseless.json"
        write_model(noiseless_model, path)
        angles = []
        for seed in (1, 2):
            with running_server(seed=seed, model_path=str(path)) as server:
                port = server.server_address[1]
                result = send_request("127.0.0.1", port, minimal_request(reps=1))
                angles.append(math.atan2(result.q[0], result.i[0]))
        assert angles[0] != angles[1]


def fuzz_payload(rng: random.Random, n: int) -> bytes:
    mode = n % 5
    if mode == 0:
        return rng.randbytes(rng.randint(1, 64))
    if mode == 1:
        return frame_write(rng.randbytes(rng.randint(1, 256)))
    if mode == 2:
        return b"\xff\xff\xff\xff" + b"x"  # absurd length claim
    if mode == 3:
        return frame_write(b'{"operation_code": 3}')
    return b"\x00"  # truncated header


def fuzz_exchange(port: int, data: bytes) -> None:
    """Send hostile bytes, half-close, and check any reply is an error envelope."""
    from rfpulse.wire import FramingError

    with socket.create_connection(("127.0.0.1", port), timeout=10) as sock:
        sock.sendall(data)
        sock.shutdown(socket.SHUT_WR)
        try:
            reply = frame_read(sock.recv)
        except (FramingError, OSError):
            return  # server dropped the connection without replying; also fine
        envelope = decode_results(reply)
        assert envelope.status == "error"


class TestRobustness:
    def test_fuzz_then_normal_request(self):
        rng = random.Random(7)
        with running_server(seed=0, read_timeout=2.0) as server:
            port = server.server_address[1]
            for n in range(500):
                try:
                    fuzz_exchange(port, fuzz_payload(rng, n))
                except OSError:
                    pass
            result = send_request("127.0.0.1", port, minimal_request(reps=2))
            assert len(result.i) == 1

"""Framing and codec behavior, including round-trip properties."""

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfpulse.components import AcquisitionResult, OperationCode
from rfpulse.wire import (
    CodecError,
    FramingError,
    ResponseEnvelope,
    decode_request,
    decode_results,
    encode_request,
    encode_results,
    frame_read,
    frame_write,
)

from conftest import minimal_request, random_request


class _ChunkedStream:
    """Byte source that hands out data in caller-chosen chunk sizes."""

    def __init__(self, data: bytes, chunk_sizes=None):
        self.data = data
        self.offset = 0
        self.chunk_sizes = list(chunk_sizes) if chunk_sizes else []

    def recv(self, n: int) -> bytes:
        if self.offset >= len(self.data):
            return b""
        if self.chunk_sizes:
            n = min(n, self.chunk_sizes.pop(0))
        chunk = self.data[self.offset : self.offset + n]
        self.offset += len(chunk)
        return chunk


class TestFraming:
    def test_golden_bytes(self):
        assert frame_write(b"{}") == bytes.fromhex("000000027b7d")

    def test_thousand_byte_header(self):
        framed = frame_write(b"x" * 1000)
        assert framed[:4] == bytes.fromhex("000003e8")

    def test_empty_payload_rejected(self):
        with pytest.raises(FramingError, match="empty frame"):
            frame_write(b"")

    def test_read_one_byte_at_a_time(self):
        stream = _ChunkedStream(bytes.fromhex("000000027b7d"), chunk_sizes=[1] * 6)
        assert frame_read(stream.recv) == b"{}"

    def test_truncated_header(self):
        stream = _ChunkedStream(bytes.fromhex("000000"))
        with pytest.raises(FramingError, match="truncated frame"):
            frame_read(stream.recv)

    def test_truncated_payload(self):
        stream = _ChunkedStream(bytes.fromhex("000000ff") + b"short")
        with pytest.raises(FramingError, match="truncated frame"):
            frame_read(stream.recv)

    def test_zero_length_frame(self):
        stream = _ChunkedStream(bytes.fromhex("00000000"))
        with pytest.raises(FramingError, match="empty frame"):
            frame_read(stream.recv)

    def test_length_limit(self):
        stream = _ChunkedStream(bytes.fromhex("40000000"))
        with pytest.raises(FramingError, match="exceeds limit"):
            frame_read(stream.recv, max_length=1024)

    @given(st.binary(min_size=1, max_size=4096), st.data())
    @settings(max_examples=100, deadline=None)
    def test_round_trip_arbitrary_chunking(self, payload, data):
        framed = frame_write(payload)
        sizes = data.draw(
            st.lists(st.integers(1, 97), min_size=0, max_size=len(framed))
        )
        stream = _ChunkedStream(framed, chunk_sizes=sizes)
        assert frame_read(stream.recv) == payload

    def test_round_trip_one_mib(self):
        payload = random.Random(5).randbytes(1024 * 1024)
        stream = _ChunkedStream(frame_write(payload))
        assert frame_read(stream.recv) == payload


class TestRequestCodec:
    def test_minimal_request_document(self):
        payload = encode_request(minimal_request())
        obj = json.loads(payload)
        assert list(obj) == ["operation_code", "cfg", "sequence", "qubits", "sweepers"]
        assert obj["operation_code"] == "EXECUTE_PULSE_SEQUENCE"
        assert obj["sequence"][0]["shape"] == {"name": "rectangular"}
        assert obj["sequence"][0]["adc"] == 0
        assert obj["sweepers"] == []

    def test_round_trip_structural_equality(self):
        rng = random.Random(42)
        for _ in range(300):
            request = random_request(rng)
            assert decode_request(encode_request(request)) == request

    def test_missing_key(self):
        obj = json.loads(encode_request(minimal_request()))
        del obj["cfg"]
        with pytest.raises(CodecError, match="missing key 'cfg'"):
            decode_request(json.dumps(obj).encode())

    def test_unknown_key_rejected(self):
        obj = json.loads(encode_request(minimal_request()))
        obj["extra"] = 1
        with pytest.raises(CodecError, match="unknown key 'extra'"):
            decode_request(json.dumps(obj).encode())

    def test_unknown_operation_code(self):
        obj = json.loads(encode_request(minimal_request()))
        obj["operation_code"] = "EXECUTE_NONSENSE"
        with pytest.raises(CodecError, match="unknown operation_code"):
            decode_request(json.dumps(obj).encode())

    def test_type_mismatch(self):
        obj = json.loads(encode_request(minimal_request()))
        obj["cfg"]["reps"] = "many"
        with pytest.raises(CodecError, match="cfg.reps: expected an integer"):
            decode_request(json.dumps(obj).encode())

    def test_malformed_json(self):
        with pytest.raises(CodecError, match="malformed JSON"):
            decode_request(b"{nope")

    def test_not_utf8(self):
        with pytest.raises(CodecError, match="not valid UTF-8"):
            decode_request(b"\xff\xfe{}")

    def test_nan_rejected(self):
        payload = encode_request(minimal_request()).replace(b'"bias":null', b'"bias":NaN')
        with pytest.raises(CodecError, match="non-finite"):
            decode_request(payload)

    def test_negative_zero_normalized(self):
        request = minimal_request(repetition_duration=-0.0)
        assert b'"repetition_duration":0.0' in encode_request(request)


class TestResultsCodec:
    def test_ok_round_trip(self):
        envelope = ResponseEnvelope.ok(AcquisitionResult(i=[0.0], q=[0.0]))
        payload = encode_results(envelope)
        assert json.loads(payload) == {"status": "ok", "i": [0.0], "q": [0.0]}
        assert decode_results(payload) == envelope

    def test_error_round_trip(self):
        envelope = ResponseEnvelope.error("unsupported sweeper parameter: duration")
        decoded = decode_results(encode_results(envelope))
        assert decoded.status == "error"
        assert decoded.message == "unsupported sweeper parameter: duration"

    def test_float_bit_exactness(self):
        rng = random.Random(9)
        values = [rng.uniform(-1e9, 1e9) for _ in range(200)]
        values += [1e-300, 2.5e-9, 0.1, 1 / 3, 6.02214076e23]
        envelope = ResponseEnvelope.ok(AcquisitionResult(i=[values], q=[values]))
        decoded = decode_results(encode_results(envelope))
        assert decoded.result.i[0] == values  # exact, not approximate

    def test_shape_mismatch_rejected(self):
        payload = b'{"status":"ok","i":[[1.0,2.0]],"q":[[1.0]]}'
        with pytest.raises(CodecError, match="shapes differ"):
            decode_results(payload)

    def test_nested_round_trip_randomized(self):
        rng = random.Random(31)
        for _ in range(100):
            n_ro = rng.randint(1, 3)
            reps = rng.randint(1, 8)
            i = [[rng.gauss(0, 1) for _ in range(reps)] for _ in range(n_ro)]
            q = [[rng.gauss(0, 1) for _ in range(reps)] for _ in range(n_ro)]
            envelope = ResponseEnvelope.ok(AcquisitionResult(i=i, q=q))
            assert decode_results(encode_results(envelope)) == envelope

    def test_unknown_status(self):
        with pytest.raises(CodecError, match="unknown response status"):
            decode_results(b'{"status":"meh"}')

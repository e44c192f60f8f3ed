"""Length-prefixed stream framing and the JSON codecs for requests/results.

A message is a 4-byte big-endian payload length followed by one UTF-8 JSON
document.  Encoding is canonical: fixed key order, compact separators,
shortest round-trip float text, negative zero normalized to ``0.0``, no
NaN/Infinity.  Decoding is strict: unknown keys, missing keys and type
mismatches are rejected with distinct diagnostics so client/server version
skew surfaces early.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Callable

from rfpulse.components import (
    AcquisitionResult,
    Arbitrary,
    Config,
    Drag,
    ExperimentRequest,
    Gaussian,
    OperationCode,
    Parameter,
    Pulse,
    PulseKind,
    PulseShape,
    Qubit,
    Rectangular,
    Sweeper,
)

__all__ = [
    "WireError",
    "FramingError",
    "CodecError",
    "ResponseEnvelope",
    "HEADER_BYTES",
    "frame_write",
    "frame_read",
    "encode_request",
    "decode_request",
    "encode_results",
    "decode_results",
]

HEADER_BYTES = 4
_HEADER = struct.Struct(">I")
_MAX_PAYLOAD = 2**32 - 1


class WireError(Exception):
    """Base class for protocol errors."""


class FramingError(WireError):
    pass


class CodecError(WireError):
    pass


@dataclass(frozen=True)
class ResponseEnvelope:
    """Server reply: either acquired results or an error message."""

    status: str
    result: AcquisitionResult | None = None
    message: str | None = None

    @classmethod
    def ok(cls, result: AcquisitionResult) -> "ResponseEnvelope":
        return cls(status="ok", result=result)

    @classmethod
    def error(cls, message: str) -> "ResponseEnvelope":
        return cls(status="error", message=message)


def frame_write(payload: bytes) -> bytes:
    """Prefix ``payload`` with its 4-byte big-endian length."""
    if len(payload) == 0:
        raise FramingError("empty frame")
    if len(payload) > _MAX_PAYLOAD:
        raise FramingError("payload too large for 32-bit length header")
    return _HEADER.pack(len(payload)) + payload


def frame_read(recv: Callable[[int], bytes], max_length: int | None = None) -> bytes:
    """Read one frame from ``recv(n)``, which may return fewer bytes than asked.

    An empty read means the stream closed.  Loops until the 4 header bytes and
    the full payload arrive, regardless of chunking.
    """
    (length,) = _HEADER.unpack(_read_exact(recv, HEADER_BYTES))
    if length == 0:
        raise FramingError("empty frame")
    if max_length is not None and length > max_length:
        raise FramingError(f"frame of {length} bytes exceeds limit of {max_length}")
    return _read_exact(recv, length)


def _read_exact(recv: Callable[[int], bytes], n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = recv(remaining)
        if not chunk:
            raise FramingError("truncated frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


# --- encoding -----------------------------------------------------------

def _f(value: float) -> float:
    x = float(value)
    if not math.isfinite(x):
        raise CodecError("non-finite number in payload")
    return 0.0 if x == 0.0 else x  # normalize -0.0


def _shape_to_obj(shape: PulseShape) -> dict:
    if isinstance(shape, Rectangular):
        return {"name": "rectangular"}
    if isinstance(shape, Gaussian):
        return {"name": "gaussian", "rel_sigma": _f(shape.rel_sigma)}
    if isinstance(shape, Drag):
        return {"name": "drag", "rel_sigma": _f(shape.rel_sigma), "beta": _f(shape.beta)}
    if isinstance(shape, Arbitrary):
        return {
            "name": "arbitrary",
            "i_samples": [_f(v) for v in shape.i_samples],
            "q_samples": [_f(v) for v in shape.q_samples],
        }
    raise CodecError(f"unknown pulse shape {type(shape).__name__}")


def _pulse_to_obj(pulse: Pulse) -> dict:
    return {
        "kind": pulse.kind.value,
        "shape": _shape_to_obj(pulse.shape),
        "frequency": _f(pulse.frequency),
        "amplitude": _f(pulse.amplitude),
        "relative_phase": _f(pulse.relative_phase),
        "start": _f(pulse.start),
        "duration": _f(pulse.duration),
        "dac": int(pulse.dac),
        "adc": None if pulse.adc is None else int(pulse.adc),
        "name": str(pulse.name),
    }


def _request_to_obj(request: ExperimentRequest) -> dict:
    return {
        "operation_code": request.operation_code.value,
        "cfg": {
            "reps": int(request.cfg.reps),
            "soft_avgs": int(request.cfg.soft_avgs),
            "repetition_duration": _f(request.cfg.repetition_duration),
            "average": bool(request.cfg.average),
        },
        "sequence": [_pulse_to_obj(p) for p in request.sequence],
        "qubits": [
            {
                "bias": None if q.bias is None else _f(q.bias),
                "dac": None if q.dac is None else int(q.dac),
            }
            for q in request.qubits
        ],
        "sweepers": [
            {
                "parameters": [p.value for p in sw.parameters],
                "indexes": [int(i) for i in sw.indexes],
                "starts": [_f(s) for s in sw.starts],
                "stops": [_f(s) for s in sw.stops],
                "expts": int(sw.expts),
            }
            for sw in request.sweepers
        ],
    }


def _dump(obj: dict) -> bytes:
    try:
        return json.dumps(obj, separators=(",", ":"), allow_nan=False).encode("utf-8")
    except ValueError as exc:
        raise CodecError(f"payload not JSON-serializable: {exc}") from exc


def encode_request(request: ExperimentRequest) -> bytes:
    return _dump(_request_to_obj(request))


def encode_results(envelope: ResponseEnvelope) -> bytes:
    if envelope.status == "ok":
        if envelope.result is None:
            raise CodecError("ok envelope without results")
        return _dump({"status": "ok", "i": envelope.result.i, "q": envelope.result.q})
    if envelope.status == "error":
        if envelope.message is None:
            raise CodecError("error envelope without message")
        return _dump({"status": "error", "message": envelope.message})
    raise CodecError(f"unknown envelope status '{envelope.status}'")


# --- decoding -----------------------------------------------------------

_REQUEST_KEYS = ("operation_code", "cfg", "sequence", "qubits", "sweepers")
_CFG_KEYS = ("reps", "soft_avgs", "repetition_duration", "average")
_PULSE_KEYS = (
    "kind", "shape", "frequency", "amplitude", "relative_phase",
    "start", "duration", "dac", "adc", "name",
)
_QUBIT_KEYS = ("bias", "dac")
_SWEEPER_KEYS = ("parameters", "indexes", "starts", "stops", "expts")
_SHAPE_KEYS = {
    "rectangular": ("name",),
    "gaussian": ("name", "rel_sigma"),
    "drag": ("name", "rel_sigma", "beta"),
    "arbitrary": ("name", "i_samples", "q_samples"),
}


def _reject_constant(name: str):
    raise CodecError("non-finite numbers are not allowed")


def _parse_json(payload: bytes):
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CodecError("payload is not valid UTF-8") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise CodecError(f"malformed JSON: {exc.msg} at position {exc.pos}") from exc


def _require_keys(obj, keys: tuple, ctx: str) -> None:
    if not isinstance(obj, dict):
        raise CodecError(f"{ctx}: expected an object")
    for key in keys:
        if key not in obj:
            raise CodecError(f"{ctx}: missing key '{key}'")
    for key in obj:
        if key not in keys:
            raise CodecError(f"{ctx}: unknown key '{key}'")


def _as_int(value, ctx: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise CodecError(f"{ctx}: expected an integer")
    return value


def _as_float(value, ctx: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CodecError(f"{ctx}: expected a number")
    return float(value)


def _as_bool(value, ctx: str) -> bool:
    if not isinstance(value, bool):
        raise CodecError(f"{ctx}: expected a boolean")
    return value


def _as_str(value, ctx: str) -> str:
    if not isinstance(value, str):
        raise CodecError(f"{ctx}: expected a string")
    return value


def _as_list(value, ctx: str) -> list:
    if not isinstance(value, list):
        raise CodecError(f"{ctx}: expected an array")
    return value


def _shape_from_obj(obj, ctx: str) -> PulseShape:
    if not isinstance(obj, dict) or "name" not in obj:
        raise CodecError(f"{ctx}: shape needs a 'name'")
    name = _as_str(obj["name"], f"{ctx}.name")
    if name not in _SHAPE_KEYS:
        raise CodecError(f"{ctx}: unknown shape '{name}'")
    _require_keys(obj, _SHAPE_KEYS[name], ctx)
    if name == "rectangular":
        return Rectangular()
    if name == "gaussian":
        return Gaussian(rel_sigma=_as_float(obj["rel_sigma"], f"{ctx}.rel_sigma"))
    if name == "drag":
        return Drag(
            rel_sigma=_as_float(obj["rel_sigma"], f"{ctx}.rel_sigma"),
            beta=_as_float(obj["beta"], f"{ctx}.beta"),
        )
    return Arbitrary(
        i_samples=tuple(
            _as_float(v, f"{ctx}.i_samples[{n}]")
            for n, v in enumerate(_as_list(obj["i_samples"], f"{ctx}.i_samples"))
        ),
        q_samples=tuple(
            _as_float(v, f"{ctx}.q_samples[{n}]")
            for n, v in enumerate(_as_list(obj["q_samples"], f"{ctx}.q_samples"))
        ),
    )


def _pulse_from_obj(obj, ctx: str) -> Pulse:
    _require_keys(obj, _PULSE_KEYS, ctx)
    kind_raw = _as_str(obj["kind"], f"{ctx}.kind")
    try:
        kind = PulseKind(kind_raw)
    except ValueError:
        raise CodecError(f"{ctx}: unknown pulse kind '{kind_raw}'") from None
    adc = obj["adc"]
    return Pulse(
        kind=kind,
        shape=_shape_from_obj(obj["shape"], f"{ctx}.shape"),
        frequency=_as_float(obj["frequency"], f"{ctx}.frequency"),
        amplitude=_as_float(obj["amplitude"], f"{ctx}.amplitude"),
        relative_phase=_as_float(obj["relative_phase"], f"{ctx}.relative_phase"),
        start=_as_float(obj["start"], f"{ctx}.start"),
        duration=_as_float(obj["duration"], f"{ctx}.duration"),
        dac=_as_int(obj["dac"], f"{ctx}.dac"),
        adc=None if adc is None else _as_int(adc, f"{ctx}.adc"),
        name=_as_str(obj["name"], f"{ctx}.name"),
    )


def _sweeper_from_obj(obj, ctx: str) -> Sweeper:
    _require_keys(obj, _SWEEPER_KEYS, ctx)
    parameters = []
    for n, raw in enumerate(_as_list(obj["parameters"], f"{ctx}.parameters")):
        label = _as_str(raw, f"{ctx}.parameters[{n}]")
        try:
            parameters.append(Parameter(label))
        except ValueError:
            raise CodecError(f"{ctx}: unknown parameter '{label}'") from None
    return Sweeper(
        parameters=tuple(parameters),
        indexes=tuple(
            _as_int(v, f"{ctx}.indexes[{n}]")
            for n, v in enumerate(_as_list(obj["indexes"], f"{ctx}.indexes"))
        ),
        starts=tuple(
            _as_float(v, f"{ctx}.starts[{n}]")
            for n, v in enumerate(_as_list(obj["starts"], f"{ctx}.starts"))
        ),
        stops=tuple(
            _as_float(v, f"{ctx}.stops[{n}]")
            for n, v in enumerate(_as_list(obj["stops"], f"{ctx}.stops"))
        ),
        expts=_as_int(obj["expts"], f"{ctx}.expts"),
    )


def decode_request(payload: bytes) -> ExperimentRequest:
    obj = _parse_json(payload)
    _require_keys(obj, _REQUEST_KEYS, "request")
    op_raw = _as_str(obj["operation_code"], "request.operation_code")
    try:
        operation = OperationCode(op_raw)
    except ValueError:
        raise CodecError(f"unknown operation_code '{op_raw}'") from None
    cfg_obj = obj["cfg"]
    _require_keys(cfg_obj, _CFG_KEYS, "cfg")
    cfg = Config(
        reps=_as_int(cfg_obj["reps"], "cfg.reps"),
        soft_avgs=_as_int(cfg_obj["soft_avgs"], "cfg.soft_avgs"),
        repetition_duration=_as_float(
            cfg_obj["repetition_duration"], "cfg.repetition_duration"
        ),
        average=_as_bool(cfg_obj["average"], "cfg.average"),
    )
    qubits = []
    for n, q in enumerate(_as_list(obj["qubits"], "qubits")):
        ctx = f"qubits[{n}]"
        _require_keys(q, _QUBIT_KEYS, ctx)
        bias = q["bias"]
        dac = q["dac"]
        qubits.append(
            Qubit(
                bias=None if bias is None else _as_float(bias, f"{ctx}.bias"),
                dac=None if dac is None else _as_int(dac, f"{ctx}.dac"),
            )
        )
    return ExperimentRequest(
        operation_code=operation,
        cfg=cfg,
        sequence=tuple(
            _pulse_from_obj(p, f"sequence[{n}]")
            for n, p in enumerate(_as_list(obj["sequence"], "sequence"))
        ),
        qubits=tuple(qubits),
        sweepers=tuple(
            _sweeper_from_obj(s, f"sweepers[{n}]")
            for n, s in enumerate(_as_list(obj["sweepers"], "sweepers"))
        ),
    )


def _check_leaves(value, ctx: str) -> None:
    if isinstance(value, list):
        for n, child in enumerate(value):
            _check_leaves(child, f"{ctx}[{n}]")
    elif isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CodecError(f"{ctx}: expected a number")
    elif not math.isfinite(value):
        raise CodecError(f"{ctx}: non-finite number")


def _congruent(a, b) -> bool:
    if isinstance(a, list) != isinstance(b, list):
        return False
    if isinstance(a, list):
        return len(a) == len(b) and all(_congruent(x, y) for x, y in zip(a, b))
    return True


def decode_results(payload: bytes) -> ResponseEnvelope:
    obj = _parse_json(payload)
    if not isinstance(obj, dict) or "status" not in obj:
        raise CodecError("response: missing key 'status'")
    status = _as_str(obj["status"], "response.status")
    if status == "ok":
        _require_keys(obj, ("status", "i", "q"), "response")
        i = _as_list(obj["i"], "response.i")
        q = _as_list(obj["q"], "response.q")
        _check_leaves(i, "response.i")
        _check_leaves(q, "response.q")
        if not _congruent(i, q):
            raise CodecError("response: i and q shapes differ")
        return ResponseEnvelope.ok(AcquisitionResult(i=i, q=q))
    if status == "error":
        _require_keys(obj, ("status", "message"), "response")
        return ResponseEnvelope.error(_as_str(obj["message"], "response.message"))
    raise CodecError(f"unknown response status '{status}'")

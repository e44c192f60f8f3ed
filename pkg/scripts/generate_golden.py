#!/usr/bin/env python3
"""Regenerate the cross-language conformance vectors under golden/.

Run from the repository root after any intentional wire-format change:

    python3 scripts/generate_golden.py
"""

from __future__ import annotations

import json
import random
import struct
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from golden_fixtures import named_fixtures, randomized_template_cases  # noqa: E402

from rfpulse.bench.templates import ExperimentKind, experiment_requests, default_params  # noqa: E402
from rfpulse.wire import encode_request  # noqa: E402


def write_named_fixtures(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, request in named_fixtures().items():
        (out_dir / f"{name}.json").write_bytes(encode_request(request))
        print(f"  {name}.json")


def write_template_cases(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for case in randomized_template_cases():
        kind = ExperimentKind(case["kind"])
        params = default_params(kind)
        params.update(case["params"])
        payloads = [
            encode_request(request).decode("utf-8")
            for request in experiment_requests(kind, params)
        ]
        lines.append(
            json.dumps(
                {
                    "name": case["name"],
                    "kind": case["kind"],
                    "params": case["params"],
                    "payloads": payloads,
                },
                separators=(",", ":"),
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"  {path.name}: {len(lines)} cases")


def write_float_vectors(path: Path) -> None:
    """Doubles (as raw bits) with their canonical wire text."""
    values = [
        0.0, 1.0, -1.0, 0.5, 2.0, 10.0, 1e-6, 2e-6, 300e-6, 5e9, 9.85e9,
        6.554e9, 4.096e9, 2.5e9, 5.5e9, 1.236992, 0.000302, 1e-4, 1e-5,
        1e15, 1e16, 1e17, 9999999999999998.0, 1e21, 1e22, 1e-300, 5e-324,
        1.7976931348623157e308, 0.1, 1 / 3, 2 / 3, 6.02214076e23,
        3.141592653589793, 2.718281828459045, 4e-8, 6.4e-8, 1.5e-7,
        0.0009765625, -0.0009765625, 123456789.123456, -987654.321,
    ]
    rng = random.Random(12345)
    while len(values) < 400:
        bits = rng.getrandbits(64)
        (candidate,) = struct.unpack("<d", struct.pack("<Q", bits))
        if candidate == candidate and abs(candidate) != float("inf"):
            values.append(candidate)
    rows = []
    for value in values:
        canonical = 0.0 if value == 0.0 else value  # wire rule: no negative zero
        rows.append(
            {
                "bits": struct.pack(">d", value).hex(),
                "text": repr(canonical),
            }
        )
    path.write_text(json.dumps(rows, indent=0), encoding="utf-8")
    print(f"  {path.name}: {len(rows)} vectors")


def main() -> None:
    golden = ROOT / "golden"
    print("writing golden/requests/")
    write_named_fixtures(golden / "requests")
    print("writing golden/templates/")
    write_template_cases(golden / "templates" / "randomized.jsonl")
    print("writing golden/float_repr.json")
    write_float_vectors(golden / "float_repr.json")


if __name__ == "__main__":
    main()

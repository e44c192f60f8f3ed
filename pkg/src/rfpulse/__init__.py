"""Pulse-sequencer stack for RFSoC-class control electronics.

A framed TCP/JSON experiment protocol, a pulse/sweeper component model,
compilation of pulse sequences into tick-quantized schedules, execution
against a deterministic simulated backend, and a benchmark harness for
latency/overhead studies.
"""

__version__ = "0.1.0"

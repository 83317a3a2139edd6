"""Deterministic discrete-event simulation of a PoE deployment.

- scenario: run configuration (membership, delays, adversary, limits)
- adversary: Byzantine behaviour programs for faulty replicas
- engine: the event loop over virtual time
- trace: trace events and the hex-armored trace file format
- checker: safety invariants evaluated over a trace
- metrics: decisions, commits, latency and message counters
"""

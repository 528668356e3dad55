"""Benchmark harness for deep-learning vibration fault diagnosis."""

__version__ = "0.1.0"

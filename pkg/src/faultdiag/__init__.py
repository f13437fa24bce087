"""Concurrent unbalance/misalignment diagnosis from current and vibration signals."""

__version__ = "0.1.0"

"""Quantum key distribution alongside classical data channels in 7-core fiber."""

__version__ = "0.1.0"

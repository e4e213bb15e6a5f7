"""Harmonic analysis operators on the integer lattice Z^N."""

__version__ = "0.1.0"

"""Verification and exhaustive search for octahedral systems."""

__version__ = "0.1.0"

"""Explicit imaginary quadratic fields whose class groups have p-rank >= 2."""

__version__ = "0.1.0"

"""Numerical tests of whether a real even function is a characteristic function."""

__version__ = "0.1.0"

"""Exact construction and verification of nine compatible quadratic Poisson brackets."""

__version__ = "0.1.0"

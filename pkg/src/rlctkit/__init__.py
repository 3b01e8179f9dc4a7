"""Exact RLCT computations for sum-of-products polynomials."""

__version__ = "0.1.0"

"""Exact-arithmetic homotopy transfer and formality certification."""

__version__ = "0.1.0"

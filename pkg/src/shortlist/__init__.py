"""Desk-scale laboratory for randomized list approximation of short programs."""

__version__ = "0.1.0"

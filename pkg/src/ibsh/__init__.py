"""Numerical laboratory for the diffusive-dispersive Ibragimov-Shabat limit."""

__version__ = "0.1.0"

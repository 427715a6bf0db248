"""Slow-light dark solitons in an EIT medium: coefficients, fluctuation modes
and squeezing."""

__version__ = "0.1.0"

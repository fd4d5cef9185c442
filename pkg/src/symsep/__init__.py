"""Exact and Monte Carlo certificates for a width separation between singleton
and pairwise symmetric network architectures."""

__version__ = "0.1.0"

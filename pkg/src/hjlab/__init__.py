"""Hopf-Lax semigroup laboratory: solvers, BV and entropy diagnostics."""

__version__ = "0.1.0"

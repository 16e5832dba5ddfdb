"""Numerical laboratory for torus dynamics, discrepancy theory,
Schrodinger cocycles, and wavepacket transport exponents."""

from .backend import BACKEND

__all__ = ["BACKEND", "__version__"]
__version__ = "0.1.0"

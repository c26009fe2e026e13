"""Divergence between single- and multi-factor structural default models.

Random band-constrained correlation matrices drive a correlated geometric
Brownian motion market; the Jeffreys divergence between the stand-alone and
the multi-factor default probabilities is aggregated over Monte Carlo
replications on a (market size, leverage, correlation regime) grid.
"""

from . import corrmat, divergence, dynamics, harness, stats
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "corrmat",
    "divergence",
    "dynamics",
    "harness",
    "stats",
]

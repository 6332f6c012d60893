"""Periodic two-dimensional gravity water waves in conformal (Riemann-mapping) variables.

Subpackages of interest:

* ``wavecrest.spectral``: Fourier multipliers on the periodic grid;
* ``wavecrest.curve``: singular integrals on a periodic curve;
* ``wavecrest.riemann``: the primary evolution of conjugate velocity and acceleration;
* ``wavecrest.lagrangian``: an independent Lagrangian integrator for cross-checks;
* ``wavecrest.normalform``: coordinate change, transformed unknown and their identities.
"""
from .errors import WavecrestError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "WavecrestError", "__version__"]

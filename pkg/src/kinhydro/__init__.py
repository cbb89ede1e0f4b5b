"""kinhydro: discrete-velocity hard-sphere Boltzmann solver and fluid-limit
verification harness."""

__version__ = "0.1.0"

from .velocity import build_grid, maxwellian, infinitesimal_maxwellian, moments

__all__ = [
    "build_grid",
    "maxwellian",
    "infinitesimal_maxwellian",
    "moments",
    "__version__",
]

"""Numerical laboratory for the Fornberg-Whitham equation with kernel ``B exp(-b|x|)``.

Modules
-------
spectral      periodic grids, transforms, the kernel multiplier, norms
initial_data  initial profiles with closed-form norms and slope extrema
evolution     pseudospectral RK4 solver with characteristic tracking
linear        free dispersive propagator and decay-rate measurement
bounds        blow-up criteria, blow-up-time and lifespan bounds
burgers       exact Burgers reference and the comparison bound
harness       experiment configs, commands and persistence
"""

__version__ = "0.1.0"

from .spectral import Field, Grid, KernelParams  # noqa: E402
from .initial_data import gaussian, odd_gaussian, scaled, zero, custom  # noqa: E402
from .evolution import SimConfig, run  # noqa: E402

__all__ = [
    "Field",
    "Grid",
    "KernelParams",
    "SimConfig",
    "custom",
    "gaussian",
    "odd_gaussian",
    "run",
    "scaled",
    "zero",
]

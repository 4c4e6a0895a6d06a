"""Two-phase diffusion sampler laboratory: grids, exact scores, samplers, metrics and checks."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .process import (
    BoundaryWarning,
    ForwardCoeffs,
    GridError,
    TimeGrid,
    build_time_grid,
    forward_coeffs,
    forward_sample,
    grid_from_iterations,
    rescale_from_z,
    rescale_to_z,
)

__all__ = [
    "BACKEND",
    "BoundaryWarning",
    "ForwardCoeffs",
    "GridError",
    "TimeGrid",
    "__version__",
    "build_time_grid",
    "forward_coeffs",
    "forward_sample",
    "grid_from_iterations",
    "rescale_from_z",
    "rescale_to_z",
]

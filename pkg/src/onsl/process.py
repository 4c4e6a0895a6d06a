"""Forward Ornstein-Uhlenbeck process, its rescaled variant, and time grids.

The forward process is ``x(t) = e^{-t} y + sqrt(1 - e^{-2t}) eps``.  The
rescaled process ``z(t) = e^t x(t) = y + sqrt(e^{2t} - 1) eps`` is pure
diffusion and is what the score identities in :mod:`onsl.validator` use.

Time grids follow ``h_k = c * min(1, t_k)``: geometric below ``t = 1`` and
uniform above it.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

# Slack used when counting steps, so that exact-integer step counts computed
# in floating point (e.g. 9 / 0.1) are not rounded up to the next integer.
_COUNT_TOL = 1e-9


class GridError(ValueError):
    """Raised when a time grid cannot be built for the requested parameters."""


class BoundaryWarning(UserWarning):
    """The solved step ratio sits at the edge of the admissible range."""


@dataclass(frozen=True)
class ForwardCoeffs:
    scale: float
    noise_std: float


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Discretization ``delta = t_0 < t_1 < ... < t_{K+1} = T``.

    ``times`` holds all ``K + 2`` points.  Step ``h_k = t_k - t_{k-1}`` is
    defined for ``k = 1..K+1``; use :meth:`h` for one-based access.
    """

    delta: float
    T: float
    c: float
    times: np.ndarray
    M: int

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @property
    def K(self) -> int:
        return len(self.times) - 2

    @property
    def steps(self) -> np.ndarray:
        """Array ``[h_1, ..., h_{K+1}]``."""
        return np.diff(self.times)

    def h(self, k: int) -> float:
        if not 1 <= k <= self.K + 1:
            raise IndexError(f"step index {k} outside 1..{self.K + 1}")
        return float(self.times[k] - self.times[k - 1])

    def t(self, k: int) -> float:
        return float(self.times[k])

    def score_error_range(self) -> range:
        """Step indices weighted in the score-error average (1..K+1)."""
        return range(1, self.K + 2)

    def kl_range(self) -> range:
        """Step indices visited by the two-step samplers (K+1 down to 2)."""
        return range(self.K + 1, 1, -1)

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return (
            self.delta == other.delta
            and self.T == other.T
            and self.c == other.c
            and np.array_equal(self.times, other.times)
        )

    def __hash__(self):
        return hash((self.delta, self.T, self.c, self.times.tobytes()))

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "T": self.T,
            "c": self.c,
            "K": self.K,
            "times": [float(t) for t in self.times],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> TimeGrid:
        times = np.asarray(data["times"], dtype=np.float64)
        if len(times) != int(data["K"]) + 2:
            raise GridError("K does not match the number of grid times")
        if not np.all(np.diff(times) > 0):
            raise GridError("grid times must be strictly increasing")
        hits = np.flatnonzero(np.isclose(times, 1.0, rtol=0, atol=1e-12))
        M = int(hits[0]) if len(hits) else -1
        return cls(float(data["delta"]), float(data["T"]), float(data["c"]), times, M)


def _check_grid_args(delta, horizon_T, c):
    if not 0.0 < delta < 1.0:
        raise GridError(f"delta must lie in (0, 1), got {delta}")
    if horizon_T < 1.0:
        raise GridError(f"horizon T must be >= 1, got {horizon_T}")
    if not 0.0 < c < 0.5:
        raise GridError(f"step ratio c must lie in (0, 1/2), got {c}")


def step_counts(delta: float, horizon_T: float, c: float) -> tuple[int, int]:
    """Return ``(M, n_uniform)``: geometric steps below 1 and uniform steps above."""
    n_geom = math.log(1.0 / delta) / -math.log1p(-c)
    M = max(1, math.ceil(n_geom - _COUNT_TOL))
    n_unif = math.ceil((horizon_T - 1.0) / c - _COUNT_TOL) if horizon_T > 1.0 else 0
    return M, max(n_unif, 0)


def build_time_grid(delta: float, horizon_T: float, c: float) -> TimeGrid:
    """Build the grid with ``h_k = c * min(1, t_k)`` backward from ``T``.

    Uniform steps of size ``c`` run down from ``T`` until the next step would
    pass 1; that last step is shrunk to land on 1 exactly.  Below 1 the points
    are ``(1 - c)^j``; the first one at or below ``delta`` is clamped to
    ``delta``.
    """
    _check_grid_args(delta, horizon_T, c)
    M, n_unif = step_counts(delta, horizon_T, c)
    upper = [horizon_T - j * c for j in range(n_unif)]
    lower = [(1.0 - c) ** j for j in range(M)]
    times = [delta] + lower[::-1] + upper[::-1]
    return TimeGrid(float(delta), float(horizon_T), float(c), np.array(times), M)


def grid_from_iterations(delta: float, horizon_T: float, K: int) -> tuple[float, TimeGrid]:
    """Solve for the step ratio giving exactly ``K + 1`` steps.

    The step count is nonincreasing in ``c``; bisection finds the smallest
    ``c`` whose grid has at most ``K + 1`` steps.  At that ``c`` one of the two
    regimes lands on its endpoint without clamping.
    """
    if K < 1:
        raise GridError("K must be positive")
    if not 0.0 < delta < 1.0 or horizon_T < 1.0:
        _check_grid_args(delta, horizon_T, 0.25)

    def n_steps(c):
        M, n_unif = step_counts(delta, horizon_T, c)
        return M + n_unif

    target = K + 1
    hi = 0.5 - 1e-12
    if n_steps(hi) > target:
        raise GridError(
            f"K={K} is too small for delta={delta}, T={horizon_T}: the step ratio "
            f"would exceed 1/2 (needs at least {n_steps(hi) - 1} iterations); raise K"
        )
    lo = 1e-12
    while hi - lo > 1e-16 * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if n_steps(mid) <= target:
            hi = mid
        else:
            lo = mid
    if n_steps(hi) != target:
        raise GridError(
            f"no step ratio yields exactly K={K} for delta={delta}, T={horizon_T}; "
            f"try K={n_steps(hi) - 1} or K={n_steps(lo) - 1}"
        )
    if hi > 0.5 - 1e-6:
        warnings.warn(
            f"step ratio c={hi!r} is at the upper boundary 1/2", BoundaryWarning, stacklevel=2
        )
    return hi, build_time_grid(delta, horizon_T, hi)


def forward_coeffs(t: float) -> ForwardCoeffs:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return ForwardCoeffs(math.exp(-t), math.sqrt(-math.expm1(-2.0 * t)))


def forward_sample(y, t: float, noise):
    """``e^{-t} y + sqrt(1 - e^{-2t}) noise`` (rows are samples)."""
    y = np.asarray(y, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if y.shape[-1:] != noise.shape[-1:]:
        raise ValueError(f"dimension mismatch: y has {y.shape}, noise has {noise.shape}")
    co = forward_coeffs(t)
    return co.scale * y + co.noise_std * noise


def rescale_to_z(x, t: float):
    return math.exp(t) * np.asarray(x, dtype=np.float64)


def rescale_from_z(z, t: float):
    return math.exp(-t) * np.asarray(z, dtype=np.float64)

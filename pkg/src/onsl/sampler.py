"""Batch samplers: ODE-step-then-noise, exponential-integrator reverse SDE, and pure PF-ODE.

All three start from ``N(0, I)`` at ``t_{K+1} = T``, visit ``k = K+1 .. 2``
and return samples at ``t_1``.  Noise for sample ``i`` at step ``k`` comes
from a counter-based stream keyed on ``(seed, k, i)``, so output does not
depend on how samples are split across workers.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from . import random as rnd
from .oracle.scores import ScoreField
from .process import TimeGrid

VARIANTS = ("ode-noise", "ei-sde", "pf-ode")
INIT_STREAM = rnd.derive_stream("sampler-init")


def noise_stream(k: int) -> int:
    return rnd.derive_stream("sampler-noise", k)


def describe_field(field: ScoreField) -> dict:
    describe = getattr(field, "describe", None)
    return describe() if describe else {"type": type(field).__name__}


@dataclass(frozen=True)
class SamplerConfig:
    grid: TimeGrid
    score: ScoreField
    n_samples: int
    seed: int
    variant: str = "ode-noise"
    d: int | None = None
    workers: int = 1
    chunk: int = rnd.DEFAULT_CHUNK

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown sampler variant {self.variant!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.grid.K < 2:
            raise ValueError("the samplers need K >= 2 (two-step lookback)")
        if self.d is None:
            d = getattr(self.score, "d", None)
            if d is None:
                raise ValueError("cannot infer the dimension from the score field; pass d")
            object.__setattr__(self, "d", int(d))

    def config_hash(self) -> str:
        payload = {
            "variant": self.variant,
            "grid": self.grid.to_dict(),
            "score": describe_field(self.score),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "d": self.d,
        }
        blob = json.dumps(payload, sort_keys=True, default=_jsonable).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True, eq=False)
class SampleBatch:
    points: np.ndarray
    at_time: float
    provenance: str

    def __post_init__(self):
        if not np.all(np.isfinite(self.points)):
            raise ValueError("sample batch contains non-finite entries")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _check_k(k, grid, lowest):
    if not lowest <= k <= grid.K + 1:
        raise IndexError(f"step index k={k} outside {lowest}..{grid.K + 1}")


def ode_noise_step(x_k, k: int, grid: TimeGrid, s_hat: ScoreField, noise):
    """One ODE-then-noise update from ``t_k`` to ``t_{k-1}``.

    The frozen-score ODE half spans ``h_k + h_{k-1}`` and lands at
    ``t_{k-2}``; forward noising over ``h_{k-1}`` brings the point to ``t_{k-1}``.
    """
    _check_k(k, grid, 2)
    x_k = np.asarray(x_k, dtype=np.float64)
    t_k = grid.t(k)
    h_k, h_prev = grid.h(k), grid.h(k - 1)
    E = math.exp(h_k + h_prev)
    x_mid = E * x_k + (E - 1.0) * s_hat.score(t_k, x_k)
    return math.exp(-h_prev) * x_mid + math.sqrt(-math.expm1(-2.0 * h_prev)) * noise


def ode_half_step(x_k, k: int, grid: TimeGrid, s_hat: ScoreField):
    """Just the frozen-score ODE half of :func:`ode_noise_step` (``t_k -> t_{k-2}``)."""
    _check_k(k, grid, 2)
    E = math.exp(grid.h(k) + grid.h(k - 1))
    x_k = np.asarray(x_k, dtype=np.float64)
    return E * x_k + (E - 1.0) * s_hat.score(grid.t(k), x_k)


def ei_sde_step(x_k, k: int, grid: TimeGrid, s_hat: ScoreField, noise):
    _check_k(k, grid, 1)
    E = math.exp(grid.h(k))
    x_k = np.asarray(x_k, dtype=np.float64)
    return E * x_k + 2.0 * (E - 1.0) * s_hat.score(grid.t(k), x_k) + math.sqrt(math.expm1(2.0 * grid.h(k))) * noise


def pf_ode_step(x_k, k: int, grid: TimeGrid, s_hat: ScoreField):
    _check_k(k, grid, 1)
    E = math.exp(grid.h(k))
    x_k = np.asarray(x_k, dtype=np.float64)
    return E * x_k + (E - 1.0) * s_hat.score(grid.t(k), x_k)


def _run_chunk(config: SamplerConfig, lo: int, hi: int, trace=None):
    grid, s_hat, seed, d = config.grid, config.score, config.seed, config.d
    n = hi - lo
    x = rnd.normals(seed, INIT_STREAM, n, d, lo)
    for k in grid.kl_range():
        if config.variant == "ode-noise":
            if trace is not None:
                trace(k, "ode", grid.t(k) - grid.h(k) - grid.h(k - 1))
            x = ode_noise_step(x, k, grid, s_hat, rnd.normals(seed, noise_stream(k), n, d, lo))
            if trace is not None:
                trace(k, "noise", grid.t(k) - grid.h(k) - grid.h(k - 1) + grid.h(k - 1))
        elif config.variant == "ei-sde":
            x = ei_sde_step(x, k, grid, s_hat, rnd.normals(seed, noise_stream(k), n, d, lo))
        else:
            x = pf_ode_step(x, k, grid, s_hat)
    return x


def run_sampler(config: SamplerConfig, trace=None) -> SampleBatch:
    """Run the configured variant; ``trace(k, stage, t)`` sees the times visited (serial only)."""
    if trace is not None:
        pts = _run_chunk(config, 0, config.n_samples, trace)
    else:
        parts = rnd.map_chunks(lambda lo, hi: _run_chunk(config, lo, hi),
                               config.n_samples, config.workers, config.chunk)
        pts = np.concatenate(parts, axis=0)
    return SampleBatch(pts, config.grid.t(1), config.config_hash())


def _require(config, variant):
    if config.variant != variant:
        raise ValueError(f"config variant is {config.variant!r}, expected {variant!r}")


def run_algorithm1(config: SamplerConfig, trace=None) -> SampleBatch:
    _require(config, "ode-noise")
    return run_sampler(config, trace)


def run_ei_sde_baseline(config: SamplerConfig) -> SampleBatch:
    _require(config, "ei-sde")
    return run_sampler(config)


def run_pf_ode(config: SamplerConfig) -> SampleBatch:
    _require(config, "pf-ode")
    return run_sampler(config)

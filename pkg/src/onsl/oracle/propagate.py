"""Exact law propagation for affine score fields.

When ``s_hat(t, x) = A_t x + b_t`` every sampler update is an affine map plus
independent Gaussian noise, so a Gaussian initial law stays Gaussian and its
mean and covariance can be pushed through the recursion exactly.
"""

from __future__ import annotations

import math

import numpy as np

from ..process import TimeGrid
from .distributions import GaussianLaw
from .scores import MixtureScore, ScoreField

VARIANTS = ("ode-noise", "ei-sde", "pf-ode")


class NonAffineScoreError(TypeError):
    """Exact propagation needs a score that is affine in x at every time."""


def _coeffs(s_hat: ScoreField, t: float, d: int):
    co = s_hat.affine(t)
    if co is None:
        raise NonAffineScoreError(f"{type(s_hat).__name__} is not affine in x at t={t}")
    A, b = co
    A = np.asarray(A, dtype=np.float64).reshape(d, d)
    b = np.asarray(b, dtype=np.float64).reshape(d)
    return A, b


def _affine_push(mean, cov, G, shift, noise_var):
    mean = G @ mean + shift
    cov = G @ cov @ G.T
    cov = 0.5 * (cov + cov.T)
    if noise_var:
        cov = cov + noise_var * np.eye(len(mean))
    return mean, cov


def propagate_affine(variant: str, grid: TimeGrid, s_hat: ScoreField, d: int,
                     init: GaussianLaw | None = None, return_path: bool = False):
    """Exact generated law at ``t_1`` for any of the three samplers.

    The chain starts from ``init`` (default ``N(0, I)``) at ``t_{K+1} = T`` and
    visits ``k = K+1 .. 2``.  With ``return_path`` the laws after each step are
    returned as ``[(t_{k-1}, law), ...]``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if grid.K < 2:
        raise ValueError("the samplers need K >= 2")
    eye = np.eye(d)
    if init is None:
        mean, cov = np.zeros(d), np.eye(d)
    else:
        mean, cov = init.mean.copy(), init.cov.copy()
    path = []
    times = grid.times
    for k in grid.kl_range():
        t_k = float(times[k])
        h_k = float(times[k] - times[k - 1])
        A, b = _coeffs(s_hat, t_k, d)
        if variant == "ode-noise":
            h_prev = float(times[k - 1] - times[k - 2])
            E = math.exp(h_k + h_prev)
            mean, cov = _affine_push(mean, cov, E * eye + (E - 1.0) * A, (E - 1.0) * b, 0.0)
            r = math.exp(-h_prev)
            mean, cov = _affine_push(mean, cov, r * eye, 0.0, -math.expm1(-2.0 * h_prev))
        elif variant == "ei-sde":
            E = math.exp(h_k)
            G = E * eye + 2.0 * (E - 1.0) * A
            mean, cov = _affine_push(mean, cov, G, 2.0 * (E - 1.0) * b, math.expm1(2.0 * h_k))
        else:
            E = math.exp(h_k)
            mean, cov = _affine_push(mean, cov, E * eye + (E - 1.0) * A, (E - 1.0) * b, 0.0)
        if return_path:
            path.append((float(times[k - 1]), GaussianLaw(mean, cov)))
    law = GaussianLaw(mean, cov)
    return (law, path) if return_path else law


def propagate_algorithm1_gaussian(p_data: GaussianLaw, grid: TimeGrid,
                                  s_hat: ScoreField | None = None) -> GaussianLaw:
    """Exact law of the ODE-then-noise sampler's output at ``t_1``.

    ``s_hat`` defaults to the exact score of ``p_data``.
    """
    if s_hat is None:
        s_hat = MixtureScore(p_data)
    return propagate_affine("ode-noise", grid, s_hat, p_data.d)

"""Controlled score perturbations and the step-weighted score-error measurement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import random as rnd
from ..process import TimeGrid, forward_sample
from .distributions import GaussianLaw
from .scores import ScoreField

MODES = ("constant-bias", "random-fourier-bias", "relative-scaling")


def as_data_law(p_data):
    return p_data.to_mixture() if isinstance(p_data, GaussianLaw) else p_data


@dataclass(frozen=True)
class ScoreErrorEstimate:
    value: float
    stderr: float


def _sample_marginal(p_data, t, n, seed, tag, start=0):
    y = p_data.sample(n, seed, rnd.derive_stream(tag, "data"), start)
    eps = rnd.normals(seed, rnd.derive_stream(tag, "noise"), n, p_data.d, start)
    return forward_sample(y, t, eps)


def weighted_mean_square(grid: TimeGrid, fn, p_data, n_mc: int, seed: int, tag: str = "wms"):
    """``(1/T) sum_k h_k E_{x ~ p_{t_k}} fn(t_k, x)`` over ``k = 1..K+1`` with its stderr."""
    p_data = as_data_law(p_data)
    total, var = 0.0, 0.0
    for k in grid.score_error_range():
        t_k = grid.t(k)
        x = _sample_marginal(p_data, t_k, n_mc, seed, f"{tag}/{k}")
        vals = fn(t_k, x)
        w = grid.h(k) / grid.T
        total += w * float(np.mean(vals))
        var += w * w * float(np.var(vals, ddof=1)) / n_mc
    return ScoreErrorEstimate(total, math.sqrt(var))


def measure_score_error(grid, s, s_hat, p_data, n_mc: int = 4000, seed: int = 0) -> ScoreErrorEstimate:
    """Monte Carlo estimate of the step-weighted mean-square score error."""
    if n_mc < 1000:
        raise ValueError("n_mc must be at least 1000")

    def sq_err(t, x):
        diff = s_hat.score(t, x) - s.score(t, x)
        return np.einsum("ni,ni->n", diff, diff)

    return weighted_mean_square(grid, sq_err, p_data, n_mc, seed, tag="score-error")


class PerturbedScore(ScoreField):
    """``s_hat`` built from an exact field plus a calibrated perturbation."""

    def __init__(self, base: ScoreField, mode: str, target_eps: float, *, bias=None,
                 gamma: float = 0.0, fourier=None):
        if mode not in MODES:
            raise ValueError(f"unsupported perturbation mode {mode!r}; choose from {MODES}")
        self.base = base
        self.mode = mode
        self.target_eps = float(target_eps)
        self.space = base.space
        self.bias = None if bias is None else np.asarray(bias, dtype=np.float64)
        self.gamma = float(gamma)
        self.fourier = fourier  # (amplitude, freqs (J, d), phases (J,), directions (J, d))
        self.d = getattr(base, "d", None)

    def describe(self):
        out = {"type": "perturbed", "mode": self.mode, "target_eps": self.target_eps,
               "base": self.base.describe()}
        if self.mode == "constant-bias":
            out["bias"] = self.bias.tolist()
        elif self.mode == "relative-scaling":
            out["gamma"] = self.gamma
        else:
            amp, freqs, phases, dirs = self.fourier
            out["fourier"] = {"amplitude": amp, "freqs": freqs.tolist(),
                              "phases": phases.tolist(), "directions": dirs.tolist()}
        return out

    def _fourier_terms(self, x):
        amp, freqs, phases, dirs = self.fourier
        arg = x @ freqs.T + phases
        return amp / math.sqrt(len(phases)), arg, freqs, dirs

    def score(self, t, x):
        base = self.base.score(t, x)
        if self.mode == "constant-bias":
            return base + self.bias
        if self.mode == "relative-scaling":
            return (1.0 + self.gamma) * base
        a, arg, _, dirs = self._fourier_terms(np.atleast_2d(x))
        return base + a * np.cos(arg) @ dirs

    def jacobian(self, t, x):
        jac = self.base.jacobian(t, x)
        if self.mode == "constant-bias":
            return jac
        if self.mode == "relative-scaling":
            return (1.0 + self.gamma) * jac
        a, arg, freqs, dirs = self._fourier_terms(np.atleast_2d(x))
        return jac - a * np.einsum("nj,ji,jk->nik", np.sin(arg), dirs, freqs)

    def laplacian(self, t, x):
        lap = self.base.laplacian(t, x)
        if self.mode == "constant-bias":
            return lap
        if self.mode == "relative-scaling":
            return (1.0 + self.gamma) * lap
        a, arg, freqs, dirs = self._fourier_terms(np.atleast_2d(x))
        w2 = np.einsum("jk,jk->j", freqs, freqs)
        return lap - a * (np.cos(arg) * w2) @ dirs

    @property
    def has_jacobian(self):
        return self.base.has_jacobian

    @property
    def has_laplacian(self):
        return self.base.has_laplacian

    def affine(self, t):
        co = self.base.affine(t)
        if co is None or self.mode == "random-fourier-bias":
            return None
        A, b = co
        if self.mode == "constant-bias":
            return A, b + self.bias
        return (1.0 + self.gamma) * A, (1.0 + self.gamma) * b


def _unit_vector(d, seed, tag):
    v = rnd.normals(seed, rnd.derive_stream(tag), 1, d)[0]
    return v / np.linalg.norm(v)


def perturb_score(base: ScoreField, mode: str, target_eps: float, seed: int = 0, *,
                  grid: TimeGrid | None = None, p_data=None, d: int | None = None,
                  n_mc: int = 4000, n_features: int = 16) -> PerturbedScore:
    """Build ``s_hat`` whose step-weighted error against ``base`` is ``target_eps**2``.

    Constant bias is calibrated exactly: a bias ``b`` contributes
    ``|b|^2 (T - delta) / T``.  The other two modes need ``grid`` and
    ``p_data`` and are calibrated by Monte Carlo.
    """
    if mode not in MODES:
        raise ValueError(f"unsupported perturbation mode {mode!r}; choose from {MODES}")
    if target_eps < 0:
        raise ValueError("target_eps must be nonnegative")
    if d is None:
        d = getattr(base, "d", None) or (p_data.d if p_data is not None else None)
    if d is None:
        raise ValueError("cannot infer dimension; pass d")

    if mode == "constant-bias":
        span = 1.0 if grid is None else (grid.T - grid.delta) / grid.T
        norm = target_eps / math.sqrt(span)
        return PerturbedScore(base, mode, target_eps, bias=norm * _unit_vector(d, seed, "bias-direction"))

    if grid is None or p_data is None:
        raise ValueError(f"mode {mode!r} needs grid and p_data for calibration")
    if target_eps == 0:
        return PerturbedScore(base, mode, 0.0, gamma=0.0,
                              fourier=(0.0, np.zeros((1, d)), np.zeros(1), np.zeros((1, d))))

    if mode == "relative-scaling":
        def sq_norm(t, x):
            s = base.score(t, x)
            return np.einsum("ni,ni->n", s, s)

        unit = weighted_mean_square(grid, sq_norm, p_data, n_mc, seed, tag="calibrate-scaling").value
        return PerturbedScore(base, mode, target_eps, gamma=target_eps / math.sqrt(unit))

    freqs = rnd.normals(seed, rnd.derive_stream("fourier-freq"), n_features, d)
    phases = 2 * math.pi * rnd.uniforms(seed, rnd.derive_stream("fourier-phase"), n_features, 1)[:, 0]
    dirs = rnd.normals(seed, rnd.derive_stream("fourier-dir"), n_features, d)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    probe = PerturbedScore(base, mode, 1.0, fourier=(1.0, freqs, phases, dirs))

    def sq_bump(t, x):
        diff = probe.score(t, x) - base.score(t, x)
        return np.einsum("ni,ni->n", diff, diff)

    unit = weighted_mean_square(grid, sq_bump, p_data, n_mc, seed, tag="calibrate-fourier").value
    amp = target_eps / math.sqrt(unit)
    return PerturbedScore(base, mode, target_eps, fourier=(amp, freqs, phases, dirs))

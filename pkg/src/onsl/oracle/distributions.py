"""Analytic data distributions: Gaussian mixtures, finite supports, single Gaussians."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .. import kernels
from .. import random as rnd


class DistributionError(ValueError):
    pass


class SingularScoreError(ValueError):
    """The score is undefined (point masses at t = 0)."""


def _as_spd(cov, name="covariance"):
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DistributionError(f"{name} must be square, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-14):
        raise DistributionError(f"{name} is not symmetric")
    if np.linalg.eigvalsh(cov)[0] <= 0:
        raise DistributionError(f"{name} is not positive definite")
    return 0.5 * (cov + cov.T)


def _check_weights(weights):
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size == 0 or np.any(w < 0):
        raise DistributionError("weights must be a nonempty nonnegative vector")
    if abs(w.sum() - 1.0) > 1e-12:
        raise DistributionError(f"weights sum to {w.sum()!r}, expected 1")
    return w


@dataclass(frozen=True, eq=False)
class GaussianLaw:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = _as_spd(self.cov)
        if cov.shape[0] != mean.shape[0]:
            raise DistributionError("mean and covariance dimensions differ")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def standard(cls, d: int) -> GaussianLaw:
        return cls(np.zeros(d), np.eye(d))

    def to_mixture(self) -> GaussianMixture:
        return GaussianMixture([1.0], [self.mean], [self.cov])

    def marginal(self, t: float) -> GaussianLaw:
        a = math.exp(-t)
        return GaussianLaw(a * self.mean, a * a * self.cov - math.expm1(-2 * t) * np.eye(self.d))

    def second_moment(self) -> float:
        return float(self.mean @ self.mean + np.trace(self.cov))

    def to_dict(self) -> dict:
        return {"type": "gaussian", "mean": self.mean.tolist(), "cov": self.cov.tolist()}


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Finite mixture ``sum_i w_i N(mu_i, Sigma_i)`` with SPD covariances.

    The static-law methods (``log_density``, ``score``, ``jacobian``,
    ``laplacian``) take a batch ``x`` of shape ``(n, d)``.
    """

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        w = _check_weights(self.weights)
        means = np.asarray(self.means, dtype=np.float64)
        if means.ndim == 1:
            means = means[:, None]
        if means.shape[0] != w.size:
            raise DistributionError("need one mean per weight")
        d = means.shape[1]
        covs = np.asarray(self.covs, dtype=np.float64)
        if covs.ndim == 1:
            covs = covs[:, None, None]
        if covs.shape != (w.size, d, d):
            raise DistributionError(f"covariances must have shape {(w.size, d, d)}, got {covs.shape}")
        covs = np.stack([_as_spd(c, f"covariance {i}") for i, c in enumerate(covs)])
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.weights.size

    @property
    def m2(self) -> float:
        tr = np.trace(self.covs, axis1=1, axis2=2)
        return float(self.weights @ (np.einsum("ij,ij->i", self.means, self.means) + tr))

    @cached_property
    def precisions(self) -> np.ndarray:
        return np.linalg.inv(self.covs)

    @cached_property
    def _log_norm(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)
        logdet = np.linalg.slogdet(self.covs)[1]
        return logw - 0.5 * logdet

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def covariance(self) -> np.ndarray:
        mu = self.mean()
        dev = self.means - mu
        return np.einsum("i,ijk->jk", self.weights, self.covs) + np.einsum(
            "i,ij,ik->jk", self.weights, dev, dev
        )

    # -- static-law evaluation ------------------------------------------------

    def _eval(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.d:
            raise ValueError(f"points have dimension {x.shape[1]}, mixture has {self.d}")
        return x, kernels.mixture_score(x, self.means, self.precisions, self._log_norm)

    def log_density(self, x) -> np.ndarray:
        _, (_, _, logd) = self._eval(x)
        return logd - 0.5 * self.d * math.log(2 * math.pi)

    def score(self, x) -> np.ndarray:
        _, (s, _, _) = self._eval(x)
        return s

    def _parts(self, x):
        x, (s, resp, _) = self._eval(x)
        g = -np.einsum("mij,nmj->nmi", self.precisions, x[:, None, :] - self.means[None])
        jac = (
            -np.einsum("nm,mij->nij", resp, self.precisions)
            + np.einsum("nm,nmi,nmj->nij", resp, g, g)
            - s[:, :, None] * s[:, None, :]
        )
        return s, resp, g, jac

    def jacobian(self, x) -> np.ndarray:
        """Hessian of the log-density, shape ``(n, d, d)``."""
        return self._parts(x)[3]

    def laplacian(self, x) -> np.ndarray:
        """Coordinate-wise Laplacian of the score, shape ``(n, d)``."""
        s, resp, g, jac = self._parts(x)
        P = self.precisions
        trP = np.trace(P, axis1=1, axis2=2)
        Pg = np.einsum("mij,nmj->nmi", P, g)
        Ps = np.einsum("mij,nj->nmi", P, s)
        gg = np.einsum("nmi,nmi->nm", g, g)
        gs = np.einsum("nmi,ni->nm", g, s)
        per_comp = (
            -(Pg - Ps)
            + g * (gg - gs)[:, :, None]
            - Pg
            - g * trP[None, :, None]
        )
        lap = np.einsum("nm,nmi->ni", resp, per_comp)
        lap -= np.einsum("nij,nj->ni", jac, s)
        lap -= s * np.trace(jac, axis1=1, axis2=2)[:, None]
        return lap

    # -- time evolution -------------------------------------------------------

    def _remember(self, key, build):
        if key not in self._cache:
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[key] = build()
        return self._cache[key]

    def marginal(self, t: float) -> GaussianMixture:
        """Law of ``x(t)``: components ``N(e^{-t} mu, e^{-2t} Sigma + (1 - e^{-2t}) I)``."""
        def build():
            a = math.exp(-t)
            covs = a * a * self.covs - math.expm1(-2 * t) * np.eye(self.d)
            return GaussianMixture(self.weights, a * self.means, covs)

        return self._remember(("x", float(t)), build)

    def z_marginal(self, t: float) -> GaussianMixture:
        """Law of ``z(t) = e^t x(t)``: components ``N(mu, Sigma + (e^{2t} - 1) I)``."""
        def build():
            covs = self.covs + math.expm1(2 * t) * np.eye(self.d)
            return GaussianMixture(self.weights, self.means, covs)

        return self._remember(("z", float(t)), build)

    def sample(self, n: int, seed: int, stream: int, start: int = 0) -> np.ndarray:
        """Rows ``start .. start+n-1`` of a reproducible draw from the mixture."""
        chol = np.linalg.cholesky(self.covs)
        xi = rnd.normals(seed, stream, n, self.d, start)
        if self.n_components == 1:
            return self.means[0] + xi @ chol[0].T
        u = rnd.uniforms(seed, rnd.derive_stream("component", stream), n, 1, start)[:, 0]
        idx = np.minimum(np.searchsorted(np.cumsum(self.weights), u), self.n_components - 1)
        return self.means[idx] + np.einsum("nij,nj->ni", chol[idx], xi)

    def is_gaussian(self) -> bool:
        return self.n_components == 1

    def as_gaussian(self) -> GaussianLaw:
        if not self.is_gaussian():
            raise DistributionError("mixture has more than one component")
        return GaussianLaw(self.means[0], self.covs[0])

    def to_dict(self) -> dict:
        return {
            "type": "mixture",
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covs": self.covs.tolist(),
        }


@dataclass(frozen=True, eq=False)
class DiscreteSupport:
    """Finitely supported data law ``sum_i w_i delta_{y_i}``."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        if atoms.shape[0] == 0:
            raise DistributionError("need at least one atom")
        w = _check_weights(self.weights)
        if w.size != atoms.shape[0]:
            raise DistributionError("need one weight per atom")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", w)

    @classmethod
    def point_mass(cls, y) -> DiscreteSupport:
        return cls(np.atleast_2d(np.asarray(y, dtype=np.float64)), [1.0])

    @property
    def d(self) -> int:
        return self.atoms.shape[1]

    @property
    def m2(self) -> float:
        return float(self.weights @ np.einsum("ij,ij->i", self.atoms, self.atoms))

    def z_marginal(self, t: float) -> GaussianMixture:
        """``q_t`` as an isotropic mixture centred on the atoms (needs ``t > 0``)."""
        if t <= 0:
            raise SingularScoreError("a finitely supported law has no score at t = 0")
        var = math.expm1(2 * t)
        covs = np.broadcast_to(var * np.eye(self.d), (len(self.weights), self.d, self.d))
        return GaussianMixture(self.weights, self.atoms, covs)

    def marginal(self, t: float) -> GaussianMixture:
        if t <= 0:
            raise SingularScoreError("a finitely supported law has no score at t = 0")
        a = math.exp(-t)
        covs = np.broadcast_to(-math.expm1(-2 * t) * np.eye(self.d), (len(self.weights), self.d, self.d))
        return GaussianMixture(self.weights, a * self.atoms, covs)

    def sample(self, n: int, seed: int, stream: int, start: int = 0) -> np.ndarray:
        if len(self.weights) == 1:
            return np.repeat(self.atoms, n, axis=0)
        u = rnd.uniforms(seed, rnd.derive_stream("component", stream), n, 1, start)[:, 0]
        idx = np.minimum(np.searchsorted(np.cumsum(self.weights), u), len(self.weights) - 1)
        return self.atoms[idx]

    def to_dict(self) -> dict:
        return {"type": "discrete", "weights": self.weights.tolist(), "atoms": self.atoms.tolist()}


def mixture_marginal(p_data: GaussianMixture, t: float) -> GaussianMixture:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return p_data.marginal(t)


def distribution_from_dict(spec: dict):
    kind = spec.get("type")
    if kind == "gaussian":
        extra = set(spec) - {"type", "mean", "cov"}
        if extra:
            raise DistributionError(f"unknown keys in gaussian description: {sorted(extra)}")
        mean = np.atleast_1d(np.asarray(spec["mean"], dtype=np.float64))
        cov = spec.get("cov")
        return GaussianLaw(mean, np.eye(mean.size) if cov is None else cov)
    if kind == "mixture":
        extra = set(spec) - {"type", "weights", "means", "covs"}
        if extra:
            raise DistributionError(f"unknown keys in mixture description: {sorted(extra)}")
        return GaussianMixture(spec["weights"], spec["means"], spec["covs"])
    if kind == "discrete":
        extra = set(spec) - {"type", "weights", "atoms"}
        if extra:
            raise DistributionError(f"unknown keys in discrete description: {sorted(extra)}")
        return DiscreteSupport(spec["atoms"], spec["weights"])
    raise DistributionError(f"unknown distribution type {kind!r}")


def load_distribution(source):
    """Load from a JSON file path, a JSON string, or an already-parsed dict."""
    if isinstance(source, dict):
        return distribution_from_dict(source)
    text = str(source)
    if text.lstrip().startswith("{"):
        return distribution_from_dict(json.loads(text))
    return distribution_from_dict(json.loads(Path(text).read_text()))

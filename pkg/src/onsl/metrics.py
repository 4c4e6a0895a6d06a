"""Divergences between laws, moment fits, and log-log rate fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import random as rnd
from .oracle.distributions import DistributionError, GaussianLaw


@dataclass(frozen=True)
class RatePoint:
    K: int
    value: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"rate value must be finite and nonnegative, got {self.value}")


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def _chol(cov, what):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise DistributionError(f"{what} covariance is not positive definite") from None


def kl_gaussian(P: GaussianLaw, Q: GaussianLaw) -> float:
    """``KL(P || Q)`` in nats."""
    if P.d != Q.d:
        raise ValueError("laws have different dimensions")
    _chol(P.cov, "first")
    Lq = _chol(Q.cov, "second")
    # eigenvalues of Sigma_Q^{-1} Sigma_P are 1 + eps_i with eps_i from the
    # whitened covariance difference; eps - log1p(eps) keeps tiny KLs accurate
    Wd = np.linalg.solve(Lq, np.linalg.solve(Lq, P.cov - Q.cov).T)
    eps = np.linalg.eigvalsh(0.5 * (Wd + Wd.T))
    if np.any(eps <= -1.0):
        raise DistributionError("first covariance is not positive definite")
    diff = np.linalg.solve(Lq, Q.mean - P.mean)
    return 0.5 * float(np.sum(eps - np.log1p(eps)) + diff @ diff)


def kl_conditional_same_cov(x, x_hat, h: float) -> float:
    """KL between ``N(e^{-h} x, (1 - e^{-2h}) I)`` and the same law centred at ``x_hat``."""
    if h <= 0:
        raise ValueError("h must be positive")
    diff = np.asarray(x, dtype=np.float64) - np.asarray(x_hat, dtype=np.float64)
    return math.exp(-2.0 * h) * float(diff @ diff) / (-2.0 * math.expm1(-2.0 * h))


def _sqrtm_spd(S):
    w, V = np.linalg.eigh(S)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def w2_gaussian(P: GaussianLaw, Q: GaussianLaw) -> float:
    """2-Wasserstein distance between two Gaussians (Bures form)."""
    _chol(P.cov, "first")
    _chol(Q.cov, "second")
    rq = _sqrtm_spd(Q.cov)
    cross = np.linalg.eigvalsh(rq @ P.cov @ rq)
    bures = np.trace(P.cov) + np.trace(Q.cov) - 2.0 * np.sum(np.sqrt(np.clip(cross, 0.0, None)))
    dm = P.mean - Q.mean
    return math.sqrt(max(float(dm @ dm + bures), 0.0))


def empirical_gaussian_fit(batch) -> GaussianLaw:
    """Sample mean and unbiased covariance of a batch (rows are samples)."""
    pts = np.asarray(getattr(batch, "points", batch), dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n, d = pts.shape
    if n < d + 2:
        raise ValueError(f"need at least d + 2 = {d + 2} samples, got {n}")
    mean = pts.mean(axis=0)
    dev = pts - mean
    cov = dev.T @ dev / (n - 1)
    if np.linalg.matrix_rank(cov) < d:
        raise DistributionError("sample covariance is rank deficient")
    return GaussianLaw(mean, cov)


@dataclass(frozen=True)
class KnnKL:
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    jittered: bool


def _knn_kl_point(p, q, k):
    n, d = p.shape
    m = q.shape[0]
    rho = cKDTree(p).query(p, k=k + 1)[0][:, -1]
    nu = cKDTree(q).query(p, k=k)[0]
    nu = nu[:, -1] if nu.ndim > 1 else nu
    return d * np.mean(np.log(nu / rho)) + math.log(m / (n - 1))


def knn_kl_estimate(samples_p, samples_q, k: int = 1, n_boot: int = 50, seed: int = 0) -> KnnKL:
    """k-nearest-neighbour estimate of ``KL(P || Q)`` with a bootstrap interval.

    Biased at finite sample size; diagnostic only.  Duplicate points would give
    zero distances, so they are broken with a tiny deterministic jitter.
    """
    p = np.asarray(getattr(samples_p, "points", samples_p), dtype=np.float64)
    q = np.asarray(getattr(samples_q, "points", samples_q), dtype=np.float64)
    p = p[:, None] if p.ndim == 1 else p
    q = q[:, None] if q.ndim == 1 else q
    if p.shape[1] != q.shape[1]:
        raise ValueError("batches have different dimensions")
    if min(len(p), len(q)) < 100 or k < 1:
        raise ValueError("need at least 100 samples per batch and k >= 1")

    jittered = False
    both = np.vstack([p, q])
    if len(np.unique(both, axis=0)) < len(both):
        jittered = True
        scale = 1e-10 * max(float(np.std(both)), 1.0)
        p = p + scale * rnd.normals(seed, rnd.derive_stream("knn-jitter-p"), *p.shape)
        q = q + scale * rnd.normals(seed, rnd.derive_stream("knn-jitter-q"), *q.shape)

    est = _knn_kl_point(p, q, k)
    boots = []
    for b in range(n_boot):
        up = rnd.uniforms(seed, rnd.derive_stream("knn-boot-p", b), len(p), 1)[:, 0]
        uq = rnd.uniforms(seed, rnd.derive_stream("knn-boot-q", b), len(q), 1)[:, 0]
        ip = np.unique((up * len(p)).astype(np.int64))
        iq = np.unique((uq * len(q)).astype(np.int64))
        boots.append(_knn_kl_point(p[ip], q[iq], k))
    boots = np.asarray(boots)
    se = float(np.std(boots, ddof=1)) if n_boot > 1 else float("nan")
    lo, hi = np.quantile(boots, [0.025, 0.975]) if n_boot > 1 else (est, est)
    return KnnKL(float(est), se, float(lo), float(hi), jittered)


def fit_rate_exponent(points) -> RateFit:
    """Least squares of ``ln value`` on ``ln K``."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit a rate")
    K = np.array([p.K for p in pts], dtype=np.float64)
    v = np.array([p.value for p in pts], dtype=np.float64)
    bad = [p.K for p in pts if not p.value > 0]
    if bad:
        raise ValueError(f"nonpositive values at K={bad}; subtract floors before fitting")
    x, y = np.log(K), np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), len(pts))


def fit_through_origin(x, y) -> tuple[float, float]:
    """Slope and uncentered R^2 of ``y = a x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    a = float(x @ y / (x @ x))
    ss_res = float(np.sum((y - a * x) ** 2))
    ss_tot = float(np.sum(y**2))
    return a, (1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0)

"""Numerical checks of the score identities and bounds on analytic data laws.

Every check returns a :class:`CheckReport` carrying its measured residuals.
Single-Gaussian and point-mass data are evaluated in closed form (and
cross-checked against Monte Carlo); mixtures use Monte Carlo with common
random numbers across the finite-difference stencil.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import integrate, optimize, special

from . import random as rnd
from .oracle.distributions import DiscreteSupport, GaussianLaw, GaussianMixture
from .oracle.scores import CapabilityError, ScoreField, exact_score_field
from .process import TimeGrid, grid_from_iterations

PASS, FAIL = "pass", "fail"

# central-difference stencils: offsets and weights (divide by dt)
_STENCIL4 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
_STENCIL6 = ((-3, -1 / 60), (-2, 9 / 60), (-1, -45 / 60), (1, 45 / 60), (2, -9 / 60), (3, 1 / 60))


class UnsupportedCheckError(ValueError):
    """The check cannot run on the given data law."""


@dataclass
class CheckReport:
    name: str
    status: str
    measured: list
    tolerance: dict
    seed: int
    wall_time: float
    notes: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def value(self, label: str) -> float:
        for key, val in self.measured:
            if key == label:
                return val
        raise KeyError(label)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["measured"] = [[k, v] for k, v in self.measured]
        return out

    def numeric_fingerprint(self) -> tuple:
        """Everything except wall time, for reproducibility comparisons."""
        return (self.name, self.status, tuple((k, repr(v)) for k, v in self.measured))

    def summary_line(self) -> str:
        shown = " ".join(f"{k}={v:.6g}" for k, v in self.measured[:6])
        return f"{self.status.upper():4s} {self.name} {shown}".rstrip()


def _report(name, failures, measured, tolerance, seed, t0, notes=""):
    return CheckReport(name, FAIL if failures else PASS, [(k, float(v)) for k, v in measured],
                       tolerance, int(seed), time.perf_counter() - t0,
                       "; ".join(filter(None, [notes] + failures)))


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# -- Monte Carlo plumbing -----------------------------------------------------

def _merge(stats):
    """Chan's pairwise merge of per-chunk (count, mean, M2) tuples, in order."""
    n, mean, m2 = stats[0]
    for nb, mb, m2b in stats[1:]:
        tot = n + nb
        delta = mb - mean
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def _mc(fn, n, workers=1, chunk=rnd.DEFAULT_CHUNK):
    """Means and standard errors of the rows of ``fn(lo, hi) -> (m, hi - lo)``."""
    def one(lo, hi):
        v = np.atleast_2d(fn(lo, hi))
        mu = v.mean(axis=1)
        return v.shape[1], mu, ((v - mu[:, None]) ** 2).sum(axis=1)

    count, mean, m2 = _merge(rnd.map_chunks(one, n, workers, chunk))
    se = np.sqrt(m2 / (count - 1) / count) if count > 1 else np.full_like(mean, np.nan)
    return mean, se


def _law_parts(p_data):
    """``(sampling law, closed-form covariance or None)``."""
    if isinstance(p_data, GaussianLaw):
        return p_data.to_mixture(), p_data.cov
    if isinstance(p_data, GaussianMixture):
        return p_data, (p_data.covs[0] if p_data.is_gaussian() else None)
    if isinstance(p_data, DiscreteSupport):
        return p_data, (np.zeros((p_data.d, p_data.d)) if len(p_data.weights) == 1 else None)
    raise UnsupportedCheckError(f"unsupported data law {type(p_data).__name__}")


def _z_paths(law, seed, tag, lo, hi):
    y = law.sample(hi - lo, seed, rnd.derive_stream(tag, "data"), lo)
    eta = rnd.normals(seed, rnd.derive_stream(tag, "noise"), hi - lo, law.d, lo)
    return y, eta


def _z_at(y, eta, t):
    return y + math.sqrt(math.expm1(2.0 * t)) * eta


def _sq(v):
    return np.einsum("ni,ni->n", v, v)


# -- closed forms for Gaussian (and point-mass) data -------------------------

def _precision(sigma, t):
    return np.linalg.inv(sigma + math.expm1(2.0 * t) * np.eye(sigma.shape[0]))


def _gauss_moments(sigma, t):
    """Closed-form z-space expectations under ``q_t`` for ``N(mu, sigma)`` data."""
    P = _precision(sigma, t)
    P2 = P @ P
    trP, trP2, trP3 = np.trace(P), np.trace(P2), np.trace(P2 @ P)
    return {
        "s2": trP,                       # E|s_r|^2
        "jac2": trP2,                    # E|grad s_r|_F^2
        "s4": trP * trP + 2.0 * trP2,    # E|s_r|^4
        "s2jac2": trP * trP2,            # E[|s_r|^2 |grad s_r|_F^2]
        "grad_s2_sq": 4.0 * trP3,        # E|grad |s_r|^2|^2
    }


def _diff(f, t, dt, stencil):
    return sum(w * f(t + o * dt) for o, w in stencil) / dt


def c_d_constant(d: int) -> float:
    """The dimension constant of the Laplacian-weighted Jacobian bound."""
    ld = math.log(d)
    return (1.0 + 2.0 * ld / d + 6.0 / d) ** (ld + 3.0) / (1.0 + ld)


# -- checks -------------------------------------------------------------------

def check_gaussian_moment(d: int, p: int, n_mc: int = 100_000, seed: int = 0, workers: int = 1) -> CheckReport:
    """Exact ``E|eta|^{2p}`` against ``(d + 2p)^p`` plus a Monte Carlo cross-check."""
    t0 = time.perf_counter()
    if d < 1 or p < 1 or int(p) != p:
        raise ValueError("need d >= 1 and integer p >= 1")
    exact = math.exp(p * math.log(2.0) + special.gammaln(p + d / 2.0) - special.gammaln(d / 2.0))
    bound = float(d + 2 * p) ** p
    # the looser (d + p)^{p/2} form for E|eta|^p is reported, not asserted
    half = math.exp(0.5 * p * math.log(2.0) + special.gammaln(0.5 * p + d / 2.0) - special.gammaln(d / 2.0))
    stream = rnd.derive_stream("gaussian-moment", d, p)

    def draw(lo, hi):
        eta = rnd.normals(seed, stream, hi - lo, d, lo)
        return _sq(eta) ** p

    (mc,), (se,) = _mc(draw, n_mc, workers)
    failures = []
    if exact > bound:
        failures.append("exact moment exceeds (d+2p)^p")
    if abs(mc - exact) > 4.0 * se:
        failures.append("Monte Carlo disagrees with the exact moment beyond 4 standard errors")
    measured = [("exact", exact), ("bound", bound), ("slack", bound / exact), ("mc", mc), ("mc_stderr", se),
                ("abs_p_moment", half), ("abs_p_statement_bound", (d + p) ** (p / 2.0))]
    return _report(f"gaussian_moment[d={d},p={p}]", failures, measured,
                   {"mc_sigmas": 4.0}, seed, t0)


def check_score_norm_bound(p_data, t: float, n_mc: int = 100_000, seed: int = 0, workers: int = 1,
                           label: str = "") -> CheckReport:
    """Monte Carlo ``E|s_r|^2`` and ``E|grad s_r|_F^2`` against their bounds (3 sigma slack)."""
    t0 = time.perf_counter()
    if t <= 0:
        raise ValueError("t must be positive")
    law, sigma = _law_parts(p_data)
    d = law.d
    field_z = exact_score_field(law, "z")
    var = math.expm1(2.0 * t)
    b_s, b_j = d / var, (2.0 * d * d + 6.0 * d) / var**2
    tag = f"score-norm/{label}/{t!r}"

    def draw(lo, hi):
        y, eta = _z_paths(law, seed, tag, lo, hi)
        z = _z_at(y, eta, t)
        jac = field_z.jacobian(t, z)
        return np.stack([_sq(field_z.score(t, z)), np.einsum("nij,nij->n", jac, jac)])

    (m_s, m_j), (se_s, se_j) = _mc(draw, n_mc, workers)
    failures = []
    if m_s - 3.0 * se_s > b_s:
        failures.append("E|s_r|^2 exceeds its bound")
    if m_j - 3.0 * se_j > b_j:
        failures.append("E|grad s_r|^2 exceeds its bound")
    measured = [("E_s2", m_s), ("E_s2_stderr", se_s), ("bound_s2", b_s),
                ("E_jac2", m_j), ("E_jac2_stderr", se_j), ("bound_jac2", b_j)]
    tol = {"mc_sigmas": 3.0}
    if sigma is not None:
        cf = _gauss_moments(sigma, t)
        measured += [("closed_s2", cf["s2"]), ("closed_jac2", cf["jac2"])]
        for key, m, se in (("s2", m_s, se_s), ("jac2", m_j, se_j)):
            if abs(m - cf[key]) > max(4.0 * se, 1e-12 * abs(cf[key])):
                failures.append(f"Monte Carlo {key} disagrees with the closed form beyond 4 sigma")
        if not np.any(sigma):
            eq = _rel(cf["s2"], b_s)
            measured.append(("point_mass_equality_rel", eq))
            tol["point_mass_equality_rel"] = 1e-3
            if eq > 1e-3:
                failures.append("point-mass equality case violated")
    measured.append(("C_d", c_d_constant(d)))
    return _report(f"score_norm_bound[{label or 'custom'},d={d},t={t:g}]", failures, measured, tol, seed, t0)


def _identity_terms(p_data, t, dt, m, n_mc, seed, workers, label):
    """Shared estimator: ``(lhs, rhs, lhs_se, rhs_se, closed)``.

    ``lhs`` is ``e^{-2t} d/dt E|s_r|^m``; ``rhs`` is
    ``-m E[|s_r|^{m-2}|grad s_r|^2] - m(m-2)/4 E[|s_r|^{m-4}|grad|s_r|^2|^2]``.
    """
    if m not in (2, 4):
        raise ValueError(f"unsupported power m={m}; use 2 or 4")
    if not t > 3 * dt > 0:
        raise ValueError("need t > 3 dt > 0 for the central stencil")
    law, sigma = _law_parts(p_data)
    scale = math.exp(-2.0 * t)
    if sigma is not None:
        key = "s2" if m == 2 else "s4"
        lhs = scale * _diff(lambda u: _gauss_moments(sigma, u)[key], t, dt, _STENCIL6)
        cf = _gauss_moments(sigma, t)
        rhs = -2.0 * cf["jac2"] if m == 2 else -4.0 * cf["s2jac2"] - 2.0 * cf["grad_s2_sq"]
        return lhs, rhs, 0.0, 0.0, True

    field_z = exact_score_field(law, "z")
    tag = f"identity/{label}/{t!r}/{m}"

    def draw(lo, hi):
        y, eta = _z_paths(law, seed, tag, lo, hi)
        fd = np.zeros(hi - lo)
        for o, w in _STENCIL6:
            u = t + o * dt
            fd += w * _sq(field_z.score(u, _z_at(y, eta, u))) ** (m // 2)
        z = _z_at(y, eta, t)
        s = field_z.score(t, z)
        jac = field_z.jacobian(t, z)
        jac2 = np.einsum("nij,nij->n", jac, jac)
        if m == 2:
            rhs = -2.0 * jac2
        else:
            grad = 2.0 * np.einsum("nij,nj->ni", jac, s)
            rhs = -4.0 * _sq(s) * jac2 - 2.0 * _sq(grad)
        return np.stack([scale * fd / dt, rhs])

    (lhs, rhs), (se_l, se_r) = _mc(draw, n_mc, workers)
    return lhs, rhs, se_l, se_r, False


def check_time_derivative_identity(p_data, t: float, dt: float = 1e-3, n_mc: int = 1_000_000, seed: int = 0,
                                   workers: int = 1, label: str = "", tol: float | None = None) -> CheckReport:
    """``d/dt E|s_r|^2`` against ``-2 e^{2t} E|grad s_r|_F^2``."""
    t0 = time.perf_counter()
    lhs, rhs, se_l, se_r, closed = _identity_terms(p_data, t, dt, 2, n_mc, seed, workers, label)
    g = math.exp(2.0 * t)
    resid = _rel(lhs, rhs)
    tol = tol if tol is not None else (1e-8 if closed else 1e-2)
    failures = [] if resid <= tol else [f"relative residual {resid:.3g} exceeds {tol:g}"]
    measured = [("relative_residual", resid), ("d_dt_E_s2", g * lhs), ("rhs", g * rhs),
                ("lhs_stderr", g * se_l), ("rhs_stderr", g * se_r)]
    return _report(f"time_derivative_identity[{label or 'custom'},d={p_data.d},t={t:g}]", failures, measured,
                   {"relative_residual": tol}, seed, t0, "closed form" if closed else "Monte Carlo")


def check_generalized_identity(p_data, t: float, m: int = 4, dt: float = 1e-3, n_mc: int = 1_000_000,
                               seed: int = 0, workers: int = 1, label: str = "",
                               tol: float | None = None) -> CheckReport:
    """Even-power identity ``e^{-2t} d/dt E|s_r|^m`` against its Jacobian-moment form."""
    t0 = time.perf_counter()
    if m % 2 or m not in (2, 4):
        raise ValueError(f"unsupported power m={m}; use 2 or 4")
    lhs, rhs, se_l, se_r, closed = _identity_terms(p_data, t, dt, m, n_mc, seed, workers, label)
    resid = _rel(lhs, rhs)
    tol = tol if tol is not None else (1e-8 if closed else 1e-2)
    failures = [] if resid <= tol else [f"relative residual {resid:.3g} exceeds {tol:g}"]
    measured = [("relative_residual", resid), ("lhs", lhs), ("rhs", rhs),
                ("lhs_stderr", se_l), ("rhs_stderr", se_r)]
    return _report(f"generalized_identity[{label or 'custom'},d={p_data.d},t={t:g},m={m}]", failures, measured,
                   {"relative_residual": tol}, seed, t0, "closed form" if closed else "Monte Carlo")


def quantile_points(p_data, t: float, n: int = 20, seed: int = 0) -> np.ndarray:
    """Evaluation points in z-space: quantiles of ``q_t`` in 1D, seeded draws otherwise."""
    law, _ = _law_parts(p_data)
    q = law.z_marginal(t)
    if law.d == 1:
        sd = np.sqrt(q.covs[:, 0, 0])
        mu = q.means[:, 0]

        def cdf(x):
            return float(q.weights @ special.ndtr((x - mu) / sd))

        lo, hi = float(np.min(mu - 12 * sd)), float(np.max(mu + 12 * sd))
        levels = (np.arange(n) + 0.5) / n
        return np.array([[optimize.brentq(lambda x: cdf(x) - a, lo, hi, xtol=1e-14)] for a in levels])
    y, eta = _z_paths(law, seed, f"fpe-points/{t!r}", 0, n)
    return _z_at(y, eta, t)


def check_score_fpe(p_data, t: float, x_points=None, dt: float = 1e-4, field: ScoreField | None = None,
                    seed: int = 0, label: str = "", tol: float | None = None) -> CheckReport:
    """Pointwise ``d/dt s_r`` against ``e^{2t} (lap s_r + 2 (grad s_r)^T s_r)``.

    ``field`` defaults to the exact z-space score of ``p_data``; pass another
    z-space field to test it against the same equation.  The residual is
    normalised by the largest right-hand side over the points.
    """
    t0 = time.perf_counter()
    if not t > 2 * dt > 0:
        raise ValueError("need t > 2 dt > 0")
    law, sigma = _law_parts(p_data)
    fz = field if field is not None else exact_score_field(law, "z")
    if fz.space != "z":
        raise ValueError("the field must be a z-space score")
    if not (fz.has_jacobian and fz.has_laplacian):
        raise CapabilityError("check_score_fpe needs a field with Jacobian and Laplacian")
    z = quantile_points(law, t, seed=seed) if x_points is None else np.atleast_2d(np.asarray(x_points, float))
    lhs = _diff(lambda u: fz.score(u, z), t, dt, _STENCIL4)
    s = fz.score(t, z)
    g = math.exp(2.0 * t)
    rhs = g * fz.laplacian(t, z) + 2.0 * g * np.einsum("nij,ni->nj", fz.jacobian(t, z), s)
    err = np.linalg.norm(lhs - rhs, axis=1)
    scale = float(np.max(np.linalg.norm(rhs, axis=1)))
    resid = float(np.max(err)) / max(scale, 1e-300)
    closed = sigma is not None and field is None
    tol = tol if tol is not None else (1e-8 if closed else 1e-3)
    failures = [] if resid <= tol else [f"relative residual {resid:.3g} exceeds {tol:g}"]
    measured = [("relative_residual", resid), ("max_abs_residual", float(np.max(err))),
                ("rhs_scale", scale), ("n_points", len(z))]
    return _report(f"score_fpe[{label or 'custom'},d={law.d},t={t:g}]", failures, measured,
                   {"relative_residual": tol}, seed, t0)


def _remainder_terms(mu, sigma, t_k, H, n_mc, seed, workers, tag):
    """MC and closed-form ``E|z_exact - z_frozen|^2`` for one step of length ``H`` ending at ``t_k``."""
    d = mu.size
    t_lo = t_k - H
    I = np.eye(d)

    def cov(u):
        return sigma + math.expm1(2.0 * u) * I

    def msqrt(S, power):
        w, V = np.linalg.eigh(S)
        return (V * w**power) @ V.T

    Ck, Clo = cov(t_k), cov(t_lo)
    flow = msqrt(Clo, 0.5) @ msqrt(Ck, -0.5)
    frozen = I - 0.5 * (math.exp(2.0 * t_k) - math.exp(2.0 * t_lo)) * np.linalg.inv(Ck)
    M = frozen - flow
    closed = float(np.trace(M @ Ck @ M.T))
    Lk = np.linalg.cholesky(Ck)
    stream = rnd.derive_stream("remainder", tag)

    def draw(lo, hi):
        w = rnd.normals(seed, stream, hi - lo, d, lo) @ Lk.T
        return _sq(w @ M.T)

    (mc,), (se,) = _mc(draw, n_mc, workers)

    def integrand(u):
        # e^{4u} E|s_r'|^2 with E|s_r'|^2 = e^{4u} tr C_u^{-3}
        return math.exp(8.0 * u) * float(np.trace(np.linalg.matrix_power(np.linalg.inv(cov(u)), 3)))

    integral = integrate.quad(integrand, t_lo, t_k, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return mc, se, closed, 0.5 * H**3 * integral


def check_discretization_remainder(p_data, grid: TimeGrid, k: int, n_mc: int = 200_000, seed: int = 0,
                                   workers: int = 1, label: str = "") -> CheckReport:
    """Frozen-score rescaled step against the exact two-step flow, with step halving."""
    t0 = time.perf_counter()
    law, sigma = _law_parts(p_data)
    if sigma is None or isinstance(p_data, DiscreteSupport):
        raise UnsupportedCheckError("the remainder check needs single-Gaussian data")
    if not 2 <= k <= grid.K + 1:
        raise IndexError(f"k={k} outside 2..{grid.K + 1}")
    mu = law.means[0]
    t_k = grid.t(k)
    H = grid.h(k) + grid.h(k - 1)
    mc, se, closed, rhs = _remainder_terms(mu, sigma, t_k, H, n_mc, seed, workers, f"{label}/{k}")
    mc_h, se_h, closed_h, rhs_h = _remainder_terms(mu, sigma, t_k, H / 2, n_mc, seed, workers, f"{label}/{k}")
    failures = []
    if mc - 3.0 * se > rhs:
        failures.append("mean-square remainder exceeds its bound")
    if mc_h - 3.0 * se_h > rhs_h:
        failures.append("halved-step remainder exceeds its bound")
    if abs(mc - closed) > max(4.0 * se, 1e-12 * closed):
        failures.append("Monte Carlo remainder disagrees with the closed form beyond 4 sigma")
    measured = [("lhs", mc), ("lhs_stderr", se), ("lhs_closed", closed), ("rhs", rhs),
                ("lhs_over_rhs", mc / rhs if rhs > 0 else math.inf),
                ("lhs_halved", mc_h), ("lhs_halved_closed", closed_h), ("rhs_halved", rhs_h),
                ("halving_ratio", mc / mc_h if mc_h > 0 else math.nan),
                ("halving_ratio_closed", closed / closed_h if closed_h > 0 else math.nan),
                ("t_k", t_k), ("step_pair", H)]
    return _report(f"discretization_remainder[{label or 'custom'},d={law.d},k={k}]", failures, measured,
                   {"mc_sigmas": 3.0}, seed, t0)


# -- suite ----------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationConfig:
    seed: int = 0
    workers: int = 1
    dims: tuple = (1, 2, 8)
    times: tuple = (0.1, 0.5, 1.5)
    moment_dims: tuple = (1, 10, 100)
    moment_powers: tuple = (1, 2, 3, 4, 5, 6)
    n_mc_mixture: int = 1_000_000
    n_mc_gaussian: int = 100_000
    dt_expectation: float = 1e-3
    dt_pointwise: float = 1e-4
    remainder_grid: dict = field(default_factory=lambda: {"delta": 1e-2, "T": 12.0, "K": 100})

    @classmethod
    def from_dict(cls, data: dict | None) -> ValidationConfig:
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown validation keys: {unknown}")
        for key in ("dims", "times", "moment_dims", "moment_powers"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


def standard_distributions(d: int) -> dict:
    shift = np.zeros(d)
    shift[0] = 2.0
    return {
        "standard-normal": GaussianLaw.standard(d),
        "shifted-normal": GaussianLaw(shift, np.eye(d)),
        "point-mass": DiscreteSupport.point_mass(np.zeros(d)),
    }


def bimodal_mixture() -> GaussianMixture:
    return GaussianMixture([0.5, 0.5], [[-2.0], [2.0]], [[[0.5]], [[0.5]]])


def suite_plan(cfg: ValidationConfig) -> list:
    """Declaration-ordered list of ``(callable, kwargs)``."""
    plan = []
    for d in cfg.moment_dims:
        for p in cfg.moment_powers:
            plan.append((check_gaussian_moment, dict(d=d, p=p, n_mc=cfg.n_mc_gaussian)))
    cases = []
    for d in cfg.dims:
        cases += [(name, law, cfg.n_mc_gaussian) for name, law in standard_distributions(d).items()]
    cases.append(("bimodal-mixture", bimodal_mixture(), cfg.n_mc_mixture))
    for name, law, n_mc in cases:
        for t in cfg.times:
            common = dict(p_data=law, t=t, label=name)
            plan.append((check_score_norm_bound, dict(common, n_mc=n_mc)))
            plan.append((check_time_derivative_identity, dict(common, dt=cfg.dt_expectation, n_mc=n_mc)))
            plan.append((check_generalized_identity, dict(common, m=4, dt=cfg.dt_expectation, n_mc=n_mc)))
            plan.append((check_score_fpe, dict(common, dt=cfg.dt_pointwise)))
    g = cfg.remainder_grid
    _, grid = grid_from_iterations(g["delta"], g["T"], g["K"])
    ks = sorted({max(2, round(f * (grid.K + 1))) for f in (0.25, 0.5, 0.75)})
    for d in cfg.dims:
        for name in ("standard-normal", "shifted-normal"):
            for k in ks:
                plan.append((check_discretization_remainder,
                             dict(p_data=standard_distributions(d)[name], grid=grid, k=k,
                                  n_mc=cfg.n_mc_gaussian, label=name)))
    return plan


def run_validation_suite(config=None) -> list[CheckReport]:
    """Run the standard matrix; reports come back in declaration order."""
    cfg = config if isinstance(config, ValidationConfig) else ValidationConfig.from_dict(config)
    plan = suite_plan(cfg)

    def run(item):
        fn, kwargs = item
        return fn(seed=cfg.seed, **kwargs)

    if cfg.workers <= 1:
        return [run(item) for item in plan]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(run, plan))


def suite_passed(reports) -> bool:
    return all(r.passed for r in reports)


__all__ = [
    "CheckReport",
    "UnsupportedCheckError",
    "ValidationConfig",
    "bimodal_mixture",
    "c_d_constant",
    "check_discretization_remainder",
    "check_gaussian_moment",
    "check_generalized_identity",
    "check_score_fpe",
    "check_score_norm_bound",
    "check_time_derivative_identity",
    "quantile_points",
    "run_validation_suite",
    "standard_distributions",
    "suite_passed",
]

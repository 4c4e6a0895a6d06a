"""Time-indexed score fields.

A score field evaluates ``score(t, x)`` on a batch ``x`` of shape ``(n, d)``.
Fields may also provide ``jacobian`` (``(n, d, d)``) and ``laplacian``
(``(n, d)``).  ``space`` is ``"x"`` for the OU process and ``"z"`` for the
rescaled process ``z = e^t x``, whose score is ``s_r(t, z) = e^{-t} s(t, e^{-t} z)``.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import (
    DiscreteSupport,
    GaussianLaw,
    GaussianMixture,
    SingularScoreError,
)


class CapabilityError(NotImplementedError):
    """The field does not provide the requested derivative."""


class ScoreField:
    space = "x"

    def score(self, t, x):
        raise NotImplementedError

    def jacobian(self, t, x):
        raise CapabilityError(f"{type(self).__name__} has no Jacobian")

    def laplacian(self, t, x):
        raise CapabilityError(f"{type(self).__name__} has no Laplacian")

    @property
    def has_jacobian(self) -> bool:
        return type(self).jacobian is not ScoreField.jacobian

    @property
    def has_laplacian(self) -> bool:
        return type(self).laplacian is not ScoreField.laplacian

    def describe(self) -> dict:
        return {"type": type(self).__name__, "space": self.space}

    def affine(self, t):
        """``(A, b)`` with ``score(t, x) = A x + b`` if the field is affine in x, else None."""
        return


def _batch(x):
    x = np.asarray(x, dtype=np.float64)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


class MixtureScore(ScoreField):
    """Exact score of the OU marginals (or rescaled marginals) of a Gaussian mixture."""

    def __init__(self, p_data, space: str = "x"):
        if isinstance(p_data, GaussianLaw):
            p_data = p_data.to_mixture()
        if space not in ("x", "z"):
            raise ValueError("space must be 'x' or 'z'")
        self.p_data = p_data
        self.space = space

    @property
    def d(self) -> int:
        return self.p_data.d

    def describe(self):
        return {"type": "exact-mixture", "space": self.space, "p_data": self.p_data.to_dict()}

    def law_at(self, t: float) -> GaussianMixture:
        if t < 0:
            raise ValueError("t must be nonnegative")
        return self.p_data.marginal(t) if self.space == "x" else self.p_data.z_marginal(t)

    def score(self, t, x):
        return self.law_at(t).score(x)

    def jacobian(self, t, x):
        return self.law_at(t).jacobian(x)

    def laplacian(self, t, x):
        return self.law_at(t).laplacian(x)

    def affine(self, t):
        if not self.p_data.is_gaussian():
            return None
        law = self.law_at(t)
        P = law.precisions[0]
        return -P, P @ law.means[0]


class DiscreteScore(ScoreField):
    """Exact score for a finitely supported data law (needs ``t > 0``)."""

    def __init__(self, data: DiscreteSupport, space: str = "z"):
        if space not in ("x", "z"):
            raise ValueError("space must be 'x' or 'z'")
        self.data = data
        self.space = space

    @property
    def d(self) -> int:
        return self.data.d

    def describe(self):
        return {"type": "exact-discrete", "space": self.space, "p_data": self.data.to_dict()}

    def _to_z(self, t, x):
        return x if self.space == "z" else math.exp(t) * np.asarray(x, dtype=np.float64)

    def score(self, t, x):
        s_r = posterior_score_discrete(self.data, t, self._to_z(t, x))
        return s_r if self.space == "z" else math.exp(t) * s_r

    def jacobian(self, t, x):
        z, _ = _batch(self._to_z(t, x))
        var = math.expm1(2 * t)
        post = _posterior(self.data, t, z)
        ybar = post @ self.data.atoms
        dev = self.data.atoms[None, :, :] - ybar[:, None, :]
        cov = np.einsum("nm,nmi,nmj->nij", post, dev, dev)
        jac = cov / var**2 - np.eye(self.d) / var
        return jac if self.space == "z" else math.exp(2 * t) * jac

    def laplacian(self, t, x):
        lap = self.data.z_marginal(t).laplacian(self._to_z(t, x))
        return lap if self.space == "z" else math.exp(3 * t) * lap

    def affine(self, t):
        if len(self.data.weights) != 1:
            return None
        var = math.expm1(2 * t)
        y = self.data.atoms[0]
        if self.space == "z":
            return -np.eye(self.d) / var, y / var
        # s(t, x) = e^t (y - e^t x) / var
        return -math.exp(2 * t) * np.eye(self.d) / var, math.exp(t) * y / var


class AffineScore(ScoreField):
    """``score(t, x) = A(t) x + b(t)`` for a user-supplied coefficient map."""

    def __init__(self, coeffs, space: str = "x", d: int | None = None, name: str = "affine"):
        self._coeffs = coeffs
        self.space = space
        self.d = d
        self.name = name

    def describe(self):
        return {"type": "affine", "name": self.name, "space": self.space, "d": self.d}

    @classmethod
    def stationary(cls, d: int) -> AffineScore:
        """The exact score ``-x`` of ``N(0, I)``."""
        eye, zero = -np.eye(d), np.zeros(d)
        return cls(lambda t: (eye, zero), d=d, name="stationary")

    @classmethod
    def zero(cls, d: int) -> AffineScore:
        zeros, zero = np.zeros((d, d)), np.zeros(d)
        return cls(lambda t: (zeros, zero), d=d, name="zero")

    def affine(self, t):
        A, b = self._coeffs(t)
        return np.atleast_2d(A), np.atleast_1d(b)

    def score(self, t, x):
        A, b = self.affine(t)
        return np.asarray(x, dtype=np.float64) @ A.T + b

    def jacobian(self, t, x):
        xb, _ = _batch(x)
        A, _ = self.affine(t)
        return np.broadcast_to(A, (xb.shape[0],) + A.shape).copy()

    def laplacian(self, t, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))


class ZSpaceView(ScoreField):
    """Rescaled view ``s_r(t, z) = e^{-t} s(t, e^{-t} z)`` of an x-space field."""

    space = "z"

    def __init__(self, base: ScoreField):
        if base.space != "x":
            raise ValueError("base field must be in x-space")
        self.base = base
        self.d = getattr(base, "d", None)

    def describe(self):
        return {"type": "z-view", "base": self.base.describe()}

    def score(self, t, z):
        return math.exp(-t) * self.base.score(t, math.exp(-t) * np.asarray(z, dtype=np.float64))

    def jacobian(self, t, z):
        return math.exp(-2 * t) * self.base.jacobian(t, math.exp(-t) * np.asarray(z, dtype=np.float64))

    def laplacian(self, t, z):
        return math.exp(-3 * t) * self.base.laplacian(t, math.exp(-t) * np.asarray(z, dtype=np.float64))

    def affine(self, t):
        co = self.base.affine(t)
        if co is None:
            return None
        A, b = co
        return math.exp(-2 * t) * A, math.exp(-t) * b


def exact_score_field(p_data, space: str = "x") -> ScoreField:
    if isinstance(p_data, DiscreteSupport):
        return DiscreteScore(p_data, space)
    return MixtureScore(p_data, space)


def _posterior(data: DiscreteSupport, t: float, z):
    if t <= 0:
        raise SingularScoreError("posterior over atoms is singular at t = 0")
    var = math.expm1(2 * t)
    sq = np.einsum("nmi,nmi->nm", z[:, None, :] - data.atoms[None], z[:, None, :] - data.atoms[None])
    with np.errstate(divide="ignore"):
        logits = np.log(data.weights)[None, :] - sq / (2 * var)
    logits -= logits.max(axis=1, keepdims=True)
    post = np.exp(logits)
    return post / post.sum(axis=1, keepdims=True)


def posterior_score_discrete(data: DiscreteSupport, t: float, z):
    """Rescaled score ``E_{y|z}[y - z] / (e^{2t} - 1)`` for a finitely supported law."""
    zb, single = _batch(z)
    if zb.shape[1] != data.d:
        raise ValueError("dimension mismatch between z and the atoms")
    post = _posterior(data, t, zb)
    out = (post @ data.atoms - zb) / math.expm1(2 * t)
    return out[0] if single else out


def _apply(method, field, t, x):
    xb, single = _batch(x)
    out = getattr(field, method)(t, xb)
    return out[0] if single else out


def score(field: ScoreField, t: float, x):
    return _apply("score", field, t, x)


def score_jacobian(field: ScoreField, t: float, x):
    return _apply("jacobian", field, t, x)


def score_laplacian(field: ScoreField, t: float, x):
    return _apply("laplacian", field, t, x)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onsl.oracle import (
    AffineScore,
    CapabilityError,
    DiscreteScore,
    DiscreteSupport,
    DistributionError,
    GaussianLaw,
    GaussianMixture,
    MixtureScore,
    NonAffineScoreError,
    ScoreField,
    SingularScoreError,
    ZSpaceView,
    load_distribution,
    mixture_marginal,
    posterior_score_discrete,
    propagate_affine,
    propagate_algorithm1_gaussian,
    score,
    score_jacobian,
    score_laplacian,
)
from onsl.process import build_time_grid, grid_from_iterations


def _mixture(d, m, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(m))
    means = rng.normal(scale=2.0, size=(m, d))
    covs = []
    for _ in range(m):
        a = rng.normal(size=(d, d))
        covs.append(a @ a.T / d + 0.2 * np.eye(d))
    return GaussianMixture(w, means, covs)


BIMODAL = GaussianMixture([0.5, 0.5], [[-2.0], [2.0]], [[[1.0]], [[1.0]]])


# -- distributions ------------------------------------------------------------------

def test_marginal_of_standard_normal_is_stationary():
    law = GaussianLaw.standard(3).to_mixture().marginal(0.8)
    np.testing.assert_allclose(law.means, np.zeros((1, 3)), atol=1e-15)
    np.testing.assert_allclose(law.covs[0], np.eye(3), atol=1e-15)


def test_marginal_of_bimodal_at_ln2():
    law = mixture_marginal(BIMODAL, math.log(2))
    np.testing.assert_allclose(law.means[:, 0], [-1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(law.covs[:, 0, 0], [1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(law.weights, [0.5, 0.5])


def test_marginal_of_near_point_mass():
    mu = np.array([1.0, -2.0])
    tiny = GaussianMixture([1.0], [mu], [1e-14 * np.eye(2)])
    law = tiny.marginal(0.4)
    np.testing.assert_allclose(law.means[0], math.exp(-0.4) * mu)
    np.testing.assert_allclose(law.covs[0], (1 - math.exp(-0.8)) * np.eye(2), atol=1e-13)


def test_validation_errors():
    with pytest.raises(DistributionError):
        GaussianMixture([0.5, 0.6], [[0.0], [1.0]], [[[1.0]], [[1.0]]])
    with pytest.raises(DistributionError):
        GaussianMixture([1.0], [[0.0, 0.0]], [[[1.0, 2.0], [2.0, 1.0]]])
    with pytest.raises(DistributionError):
        DiscreteSupport(np.zeros((0, 2)), [])


def test_second_moment():
    mix = GaussianMixture([0.25, 0.75], [[1.0, 0.0], [0.0, 2.0]], [np.eye(2), 2 * np.eye(2)])
    assert mix.m2 == pytest.approx(0.25 * (1 + 2) + 0.75 * (4 + 4))
    assert GaussianLaw(np.array([3.0]), np.eye(1)).second_moment() == pytest.approx(10.0)


def test_load_distribution_round_trip(tmp_path):
    mix = _mixture(2, 3, 0)
    again = load_distribution(mix.to_dict())
    np.testing.assert_array_equal(again.means, mix.means)
    path = tmp_path / "d.json"
    path.write_text(__import__("json").dumps({"type": "discrete", "atoms": [[0.0], [1.0]], "weights": [0.3, 0.7]}))
    assert isinstance(load_distribution(str(path)), DiscreteSupport)
    g = load_distribution('{"type": "gaussian", "mean": [3, 0]}')
    np.testing.assert_array_equal(g.cov, np.eye(2))
    with pytest.raises(DistributionError):
        load_distribution({"type": "gaussian", "mean": [0], "colour": "red"})
    with pytest.raises(DistributionError):
        load_distribution({"type": "cauchy"})


def test_sampling_moments():
    mix = _mixture(2, 2, 4)
    x = mix.sample(200_000, 0, 17)
    n = len(x)
    mean_se = np.sqrt(np.diag(mix.covariance()) / n)
    assert np.all(np.abs(x.mean(0) - mix.mean()) < 4 * mean_se)


# -- scores ---------------------------------------------------------------------------

def test_standard_normal_score_and_derivatives():
    field = MixtureScore(GaussianLaw.standard(3))
    x = np.random.default_rng(0).normal(size=(5, 3))
    np.testing.assert_allclose(field.score(0.7, x), -x, atol=1e-14)
    np.testing.assert_allclose(field.jacobian(0.7, x), np.broadcast_to(-np.eye(3), (5, 3, 3)), atol=1e-14)
    np.testing.assert_allclose(field.laplacian(0.7, x), 0.0, atol=1e-14)


def test_shifted_normal_score():
    mu = np.array([3.0, -1.0])
    t = 0.9
    field = MixtureScore(GaussianLaw(mu, np.eye(2)))
    x = np.array([[0.5, 0.2]])
    np.testing.assert_allclose(field.score(t, x), -(x - math.exp(-t) * mu), atol=1e-14)


def test_single_gaussian_laplacian_is_zero():
    field = MixtureScore(_mixture(3, 1, 8))
    x = np.random.default_rng(1).normal(size=(20, 3))
    np.testing.assert_allclose(field.laplacian(0.3, x), 0.0, atol=1e-12)


@pytest.mark.parametrize("d,m,t", [(1, 2, 0.3), (2, 3, 0.5), (4, 2, 1.1)])
def test_score_matches_log_density_differences(d, m, t):
    law = _mixture(d, m, d * 10 + m).marginal(t)
    x = np.random.default_rng(d).normal(scale=2.0, size=(100, d))
    h = 1e-5
    fd = np.empty_like(x)
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        fd[:, j] = (law.log_density(x + e) - law.log_density(x - e)) / (2 * h)
    s = law.score(x)
    np.testing.assert_allclose(fd, s, rtol=1e-6, atol=1e-6 * np.max(np.abs(s)))


@pytest.mark.parametrize("d,m,t", [(1, 2, 0.3), (2, 3, 0.5), (4, 2, 1.1)])
def test_jacobian_matches_score_differences(d, m, t):
    field = MixtureScore(_mixture(d, m, d + 7 * m))
    x = np.random.default_rng(3).normal(scale=2.0, size=(50, d))
    h = 1e-5
    jac = field.jacobian(t, x)
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        fd = (field.score(t, x + e) - field.score(t, x - e)) / (2 * h)
        np.testing.assert_allclose(fd, jac[:, :, j], rtol=1e-5, atol=1e-5 * np.max(np.abs(jac)))


def test_laplacian_matches_second_differences():
    field = MixtureScore(BIMODAL)
    x = np.linspace(-4, 4, 41)[:, None]
    h = 1e-3
    for t in (0.2, 0.5, 1.0):
        fd = (field.score(t, x + h) - 2 * field.score(t, x) + field.score(t, x - h)) / h**2
        lap = field.laplacian(t, x)
        np.testing.assert_allclose(fd, lap, rtol=1e-3, atol=1e-3 * np.max(np.abs(lap)))


def test_laplacian_multivariate_matches_differences():
    field = MixtureScore(_mixture(3, 3, 21))
    x = np.random.default_rng(5).normal(size=(10, 3))
    t, h = 0.4, 1e-3
    fd = np.zeros_like(x)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd += (field.score(t, x + e) - 2 * field.score(t, x) + field.score(t, x - e)) / h**2
    lap = field.laplacian(t, x)
    np.testing.assert_allclose(fd, lap, rtol=1e-3, atol=1e-3 * np.max(np.abs(lap)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0.05, 3.0), d=st.integers(1, 4))
def test_jacobian_symmetry(seed, t, d):
    field = MixtureScore(_mixture(d, 3, seed))
    x = np.random.default_rng(seed).normal(scale=3.0, size=(20, d))
    jac = field.jacobian(t, x)
    asym = np.linalg.norm(jac - np.swapaxes(jac, 1, 2), axis=(1, 2))
    assert np.all(asym <= 1e-8 * np.maximum(np.linalg.norm(jac, axis=(1, 2)), 1e-300))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0.05, 3.0))
def test_z_and_x_space_consistency(seed, t):
    mix = _mixture(2, 2, seed)
    z = np.random.default_rng(seed + 1).normal(scale=3.0, size=(10, 2))
    s_r = MixtureScore(mix, space="z").score(t, z)
    via_x = math.exp(-t) * MixtureScore(mix).score(t, math.exp(-t) * z)
    np.testing.assert_allclose(s_r, via_x, rtol=1e-10, atol=1e-10 * np.max(np.abs(via_x)))
    view = ZSpaceView(MixtureScore(mix))
    np.testing.assert_allclose(view.score(t, z), via_x, rtol=1e-12)
    np.testing.assert_allclose(view.jacobian(t, z), MixtureScore(mix, "z").jacobian(t, z), rtol=1e-9, atol=1e-12)


def test_far_points_do_not_underflow():
    field = MixtureScore(BIMODAL)
    x = np.array([[-300.0], [300.0]])
    s = field.score(0.0, x)
    assert np.all(np.isfinite(s))
    np.testing.assert_allclose(s[:, 0], [298.0, -298.0])


def test_module_level_helpers_accept_single_points():
    field = MixtureScore(GaussianLaw.standard(2))
    x = np.array([0.5, -1.0])
    np.testing.assert_allclose(score(field, 0.3, x), -x)
    assert score_jacobian(field, 0.3, x).shape == (2, 2)
    assert score_laplacian(field, 0.3, x).shape == (2,)


def test_singular_score_at_zero_for_atoms():
    data = DiscreteSupport.point_mass([1.0])
    with pytest.raises(SingularScoreError):
        posterior_score_discrete(data, 0.0, np.array([0.0]))
    with pytest.raises(SingularScoreError):
        DiscreteScore(data).score(0.0, np.array([[0.0]]))


def test_capability_errors():
    class ScoreOnly(ScoreField):
        def score(self, t, x):
            return -x

    f = ScoreOnly()
    assert not f.has_jacobian and not f.has_laplacian
    with pytest.raises(CapabilityError):
        f.jacobian(0.1, np.zeros((1, 1)))


# -- discrete data and the posterior form -------------------------------------------------

def test_single_atom_posterior_score():
    data = DiscreteSupport.point_mass([0.0, 0.0])
    z = np.array([[1.0, -2.0]])
    t = 0.6
    v = math.expm1(2 * t)
    np.testing.assert_allclose(posterior_score_discrete(data, t, z), -z / v)
    jac = DiscreteScore(data).jacobian(t, z)
    np.testing.assert_allclose(jac[0], -np.eye(2) / v, atol=1e-15)
    np.testing.assert_allclose(DiscreteScore(data).laplacian(t, z), 0.0, atol=1e-12)


def test_symmetric_atoms_give_zero_at_origin():
    data = DiscreteSupport([[-1.5, 0.0], [1.5, 0.0]], [0.5, 0.5])
    np.testing.assert_allclose(posterior_score_discrete(data, 0.4, np.zeros(2)), 0.0, atol=1e-15)


def test_posterior_form_matches_density_gradient():
    data = DiscreteSupport([[-1.0, 0.5], [2.0, 0.0], [0.3, -1.2]], [0.2, 0.5, 0.3])
    t = 0.35
    q = data.z_marginal(t)
    z = np.random.default_rng(2).normal(scale=2.0, size=(30, 2))
    direct = q.score(z)
    post = posterior_score_discrete(data, t, z)
    np.testing.assert_allclose(post, direct, rtol=1e-8, atol=1e-8 * np.max(np.abs(direct)))
    np.testing.assert_allclose(DiscreteScore(data).jacobian(t, z), q.jacobian(z), rtol=1e-8, atol=1e-10)


def test_posterior_form_is_limit_of_narrow_mixture():
    atoms = np.array([[-1.0], [0.5], [2.0]])
    w = [0.3, 0.3, 0.4]
    data = DiscreteSupport(atoms, w)
    narrow = GaussianMixture(w, atoms, [1e-10 * np.eye(1)] * 3)
    t = 0.5
    z = np.linspace(-3, 4, 25)[:, None]
    np.testing.assert_allclose(posterior_score_discrete(data, t, z), MixtureScore(narrow, "z").score(t, z),
                               rtol=1e-6, atol=1e-6)


def test_discrete_x_space_chain_rule():
    data = DiscreteSupport([[-1.0], [1.0]], [0.4, 0.6])
    t = 0.45
    x = np.linspace(-2, 2, 9)[:, None]
    xs = DiscreteScore(data, "x")
    ref = MixtureScore(GaussianMixture([0.4, 0.6], [[-1.0], [1.0]], [[[1e-12]], [[1e-12]]]))
    np.testing.assert_allclose(xs.score(t, x), ref.score(t, x), rtol=1e-7, atol=1e-9)
    np.testing.assert_allclose(xs.jacobian(t, x), ref.jacobian(t, x), rtol=1e-6, atol=1e-8)


# -- exact propagation ---------------------------------------------------------------------

def test_fixed_point_propagation():
    g = build_time_grid(0.01, 10.0, 0.1)
    for variant in ("ode-noise", "pf-ode"):
        law = propagate_affine(variant, g, MixtureScore(GaussianLaw.standard(3)), 3)
        np.testing.assert_allclose(law.mean, 0.0, atol=1e-14)
        np.testing.assert_allclose(law.cov, np.eye(3), atol=1e-12)


def test_ei_sde_scalar_variance_recursion():
    g = build_time_grid(0.05, 3.0, 0.2)
    law = propagate_affine("ei-sde", g, AffineScore.stationary(1), 1)
    v = 1.0
    for k in g.kl_range():
        E = math.exp(g.h(k))
        v = (2 - E) ** 2 * v + (E * E - 1)
    assert law.cov[0, 0] == pytest.approx(v, rel=1e-13)
    assert abs(v - 1.0) > 1e-4  # not a fixed point


def test_zero_score_recursions():
    g = build_time_grid(0.05, 3.0, 0.2)
    ode = propagate_affine("ode-noise", g, AffineScore.zero(1), 1)
    v = 1.0
    for k in g.kl_range():
        a = math.exp(g.h(k))
        v = a * a * v + 1 - math.exp(-2 * g.h(k - 1))
    assert ode.cov[0, 0] == pytest.approx(v, rel=1e-13)
    sde = propagate_affine("ei-sde", g, AffineScore.zero(1), 1)
    v = 1.0
    for k in g.kl_range():
        v = math.exp(2 * g.h(k)) * v + math.expm1(2 * g.h(k))
    assert sde.cov[0, 0] == pytest.approx(v, rel=1e-13)


def test_propagation_path_reports_grid_times():
    g = build_time_grid(0.05, 3.0, 0.2)
    _, path = propagate_affine("ode-noise", g, AffineScore.stationary(2), 2, return_path=True)
    assert [t for t, _ in path] == [g.t(k - 1) for k in g.kl_range()]


def test_propagate_rejects_non_affine():
    g = build_time_grid(0.05, 3.0, 0.2)
    with pytest.raises(NonAffineScoreError):
        propagate_affine("ode-noise", g, MixtureScore(BIMODAL), 1)


def test_algorithm1_kl_shrinks_with_K():
    from onsl.metrics import kl_gaussian

    law = GaussianLaw(np.array([3.0, 0.0]), np.diag([0.1, 2.0]))
    kls = []
    for K in (50, 100, 200, 400):
        _, g = grid_from_iterations(0.01, 12.0, K)
        kls.append(kl_gaussian(law.marginal(g.t(1)), propagate_algorithm1_gaussian(law, g)))
    assert all(a > b for a, b in zip(kls, kls[1:]))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onsl import random as rnd
from onsl.kernels import BACKEND, _pykernels, available_backends
from onsl.oracle import GaussianMixture

MASK = (1 << 64) - 1
BACKENDS = available_backends()


def _mix_int(z):
    z = (z + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _uniform_int(seed, stream, counter):
    key = _mix_int(seed ^ _mix_int((stream + 0x632BE59BD9B4E019) & MASK))
    bits = _mix_int(_mix_int((counter + key) & MASK))
    return ((bits >> 11) + 0.5) * 2.0**-53


def test_splitmix_reference_value():
    # first output of splitmix64 seeded with 0
    assert _mix_int(0) == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_uniforms_match_integer_reference(name):
    k = BACKENDS[name]
    u = k.counter_uniforms(7, 11, 3, 4, 2)
    for i in range(4):
        for j in range(2):
            assert u[i, j] == _uniform_int(7, 11, (3 + i) * 2 + j)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_normals_match_box_muller_reference(name):
    z = BACKENDS[name].counter_normals(5, 9, 10, 3, 2)
    for i in range(3):
        for j in range(2):
            c = 2 * ((10 + i) * 2 + j)
            u1, u2 = _uniform_int(5, 9, c), _uniform_int(5, 9, c + 1)
            assert z[i, j] == pytest.approx(math.sqrt(-2 * math.log(u1)) * math.cos(2 * math.pi * u2), abs=1e-15)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_backends_agree():
    c, p = BACKENDS["cython"], BACKENDS["python"]
    assert c.stream_key(123, 456) == p.stream_key(123, 456)
    np.testing.assert_array_equal(c.counter_uniforms(1, 2, 5, 1000, 3), p.counter_uniforms(1, 2, 5, 1000, 3))
    np.testing.assert_allclose(c.counter_normals(1, 2, 5, 1000, 3), p.counter_normals(1, 2, 5, 1000, 3),
                               rtol=0, atol=1e-14)
    mix = GaussianMixture([0.2, 0.5, 0.3], np.random.default_rng(1).normal(size=(3, 4)),
                          [np.eye(4) * s for s in (0.3, 1.0, 2.5)])
    x = np.random.default_rng(2).normal(size=(500, 4)) * 3
    for a, b in zip(c.mixture_score(x, mix.means, mix.precisions, mix._log_norm),
                    p.mixture_score(x, mix.means, mix.precisions, mix._log_norm)):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_backend_name():
    assert BACKEND in ("cython", "python")


@settings(max_examples=30, deadline=None)
@given(start=st.integers(0, 10_000), n=st.integers(1, 50), split=st.integers(0, 50))
def test_rows_are_position_independent(start, n, split):
    split = min(split, n)
    full = rnd.normals(3, 99, n, 2, start)
    left = rnd.normals(3, 99, split, 2, start)
    right = rnd.normals(3, 99, n - split, 2, start + split)
    np.testing.assert_array_equal(full, np.vstack([left, right]))


def test_uniform_range_and_moments():
    u = rnd.uniforms(0, rnd.derive_stream("u"), 200_000, 1)
    assert u.min() > 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 4 * math.sqrt(1 / 12 / 200_000)


def test_normal_moments():
    z = rnd.normals(0, rnd.derive_stream("z"), 400_000, 1)[:, 0]
    n = z.size
    assert abs(z.mean()) < 4 / math.sqrt(n)
    assert abs(z.var() - 1) < 4 * math.sqrt(2 / n)


def test_streams_differ():
    a = rnd.normals(0, rnd.derive_stream("a"), 10, 1)
    b = rnd.normals(0, rnd.derive_stream("b"), 10, 1)
    c = rnd.normals(1, rnd.derive_stream("a"), 10, 1)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_map_chunks_independent_of_workers():
    def fn(lo, hi):
        return rnd.normals(4, 5, hi - lo, 3, lo)

    one = np.vstack(rnd.map_chunks(fn, 1000, workers=1, chunk=64))
    many = np.vstack(rnd.map_chunks(fn, 1000, workers=8, chunk=64))
    whole = rnd.normals(4, 5, 1000, 3)
    np.testing.assert_array_equal(one, many)
    np.testing.assert_array_equal(one, whole)


def test_pure_python_module_documented_signature():
    s, r, ld = _pykernels.mixture_score(np.zeros((1, 1)), np.zeros((1, 1)), np.ones((1, 1, 1)), np.zeros(1))
    assert s.shape == (1, 1) and r.shape == (1, 1) and ld.shape == (1,)

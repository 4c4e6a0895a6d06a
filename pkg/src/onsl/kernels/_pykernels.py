"""Pure-numpy reference versions of the compiled kernels.

Keep these in lock-step with ``_ckernels.pyx``; the test-suite checks the two
against each other.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0x632BE59BD9B4E019)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


def _mix(z):
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed, stream):
    with np.errstate(over="ignore"):
        s = np.array([seed], dtype=np.uint64)
        t = np.array([stream], dtype=np.uint64)
        return int(_mix(s ^ _mix(t + _STREAM_SALT))[0])


def _uniform_bits(key, start, n, width):
    # counter = row * width + col, rows counted from `start`
    base = np.arange(start * width, (start + n) * width, dtype=np.uint64)
    return _mix(_mix(base + np.uint64(key)))


def counter_uniforms(seed, stream, start, n, d):
    key = stream_key(seed, stream)
    bits = _uniform_bits(key, start, n, d)
    return (((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53).reshape(n, d)


def counter_normals(seed, stream, start, n, d):
    key = stream_key(seed, stream)
    bits = _uniform_bits(key, start, n, 2 * d).reshape(n * d, 2)
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53
    r = np.sqrt(-2.0 * np.log(u[:, 0]))
    return (r * np.cos(_TWO_PI * u[:, 1])).reshape(n, d)


def mixture_score(x, means, precisions, log_norm):
    """Score and responsibilities of ``sum_i exp(log_norm_i) N(x; m_i, P_i^{-1})``.

    ``log_norm_i`` must already include ``log w_i + 0.5 log det P_i``.
    Returns ``(score, resp, log_density)`` where ``log_density`` omits the
    ``-d/2 log(2 pi)`` constant.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    diff = x[:, None, :] - means[None, :, :]                    # (n, m, d)
    g = -np.einsum("mij,nmj->nmi", precisions, diff)            # component scores
    quad = -np.einsum("nmi,nmi->nm", diff, g)
    logits = log_norm[None, :] - 0.5 * quad
    top = logits.max(axis=1, keepdims=True)
    w = np.exp(logits - top)
    total = w.sum(axis=1, keepdims=True)
    resp = w / total
    score = np.einsum("nm,nmi->ni", resp, g)
    log_density = top[:, 0] + np.log(total[:, 0])
    return score, resp, log_density

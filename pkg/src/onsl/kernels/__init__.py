"""Hot kernels with a compiled implementation and a numpy fallback.

The compiled extension is used when it imports; set ``ONSL_PURE_PYTHON=1`` to
force the fallback.  ``BACKEND`` names the active implementation.
"""

import os

from . import _pykernels

if os.environ.get("ONSL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

stream_key = _impl.stream_key
counter_uniforms = _impl.counter_uniforms
counter_normals = _impl.counter_normals
mixture_score = _impl.mixture_score


def available_backends():
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out

"""Hot kernels, compiled when available.

The Cython extension ``_ckernels`` is imported if it was built; otherwise the
numpy versions in ``_pykernels`` are used. Set ``CREDIT_DIVERGENCE_KERNELS=python``
to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("CREDIT_DIVERGENCE_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        _impl = _ckernels

norm_cdf = _impl.norm_cdf
jeffreys_bernoulli = _impl.jeffreys_bernoulli
gram_noise = _impl.gram_noise
row_sumsq = _impl.row_sumsq
offdiag_abs_range = _impl.offdiag_abs_range


def backends():
    """Return the importable kernel modules keyed by backend name."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        return found
    found["cython"] = _ckernels
    return found


__all__ = [
    "BACKEND",
    "backends",
    "gram_noise",
    "jeffreys_bernoulli",
    "norm_cdf",
    "offdiag_abs_range",
    "row_sumsq",
]

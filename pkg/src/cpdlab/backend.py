"""Selects the compiled kernel extension when available.

The Cython extension is optional: if it failed to build (or the environment
variable ``CPDLAB_PURE`` is set to a non-empty value other than ``0``), the
numpy fallback in ``_pykernels`` is used.  Both produce bit-identical output;
``benchmarks/backend_bench.py`` compares their speed and checks agreement.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_FORCE_PURE = os.environ.get("CPDLAB_PURE", "") not in ("", "0")
_impl = _pykernels if (_ckernels is None or _FORCE_PURE) else _ckernels


def backend_name():
    return "pure-python" if _impl is _pykernels else "compiled"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def dp_mean_suffix(S, SS, lam):
    return _impl.dp_mean_suffix(_f64(S), _f64(SS), float(lam))


def dp_gram_suffix(Dg, D2, P, lam):
    return _impl.dp_gram_suffix(_f64(Dg), _f64(D2), _f64(P), float(lam))


def cusum_argmax(S, s, e, lo, hi):
    t, a = _impl.cusum_argmax(_f64(S), int(s), int(e), int(lo), int(hi))
    return int(t), float(a)


def ks_argmax(x, s, e, lo, hi):
    t, a = _impl.ks_argmax(_f64(x), int(s), int(e), int(lo), int(hi))
    return int(t), float(a)

"""Kernel backend selection.

The compiled Cython kernels are used when the extension was built;
otherwise the numpy implementations are. :func:`use` switches explicitly,
which the tests and the benchmark rely on.
"""
from bwfusion import _pykernels

try:
    from bwfusion import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_IMPLS = {"python": _pykernels}
if _ckernels is not None:
    _IMPLS["cython"] = _ckernels

_active = _IMPLS.get("cython", _pykernels)


def available():
    return sorted(_IMPLS)


def name():
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def use(backend):
    """Select ``"cython"`` or ``"python"`` kernels; returns the previous name."""
    global _active
    if backend not in _IMPLS:
        raise ValueError(f"backend {backend!r} not available; have {available()}")
    previous = name()
    _active = _IMPLS[backend]
    return previous


def convolve_axis(arr, taps, step, axis):
    return _active.convolve_axis(arr, taps, step, axis)


def window_moments(a, b, size, stride):
    return _active.window_moments(a, b, size, stride)

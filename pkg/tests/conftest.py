import numpy as np
import pytest

from bwfusion import _backend


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(params=_backend.available())
def backend(request):
    previous = _backend.use(request.param)
    yield request.param
    _backend.use(previous)


def dense_atrous_smooth(x, step):
    """Direct 2-D correlation with the dilated 5x5 B3 outer-product kernel.

    Uses numpy's whole-sample ``reflect`` padding, so it shares no code
    with the package's separable kernels.
    """
    taps = np.array([1, 4, 6, 4, 1]) / 16.0
    k2 = np.outer(taps, taps)
    pad = 2 * step
    xp = np.pad(x, pad, mode="reflect")
    h, w = x.shape
    out = np.zeros_like(x, dtype=float)
    for i in range(5):
        for j in range(5):
            di, dj = i * step, j * step
            out += k2[i, j] * xp[di:di + h, dj:dj + w]
    return out


def oracle_decompose(x, levels):
    """Plain re-statement of the a trous recursion using the dense smoother."""
    approx = np.asarray(x, dtype=float)
    planes = []
    for j in range(levels):
        nxt = dense_atrous_smooth(approx, 2**j)
        planes.append(approx - nxt)
        approx = nxt
    return planes, approx

"""Pure-numpy reference kernels.

Same contract as the compiled ``_ckernels`` module; used when the extension
is not built, and as the comparison baseline in tests and benchmarks.
"""
import numpy as np


def reflect_index(idx, n):
    """Whole-sample mirror of integer indices into ``[0, n)`` (``d c b | a b c d``)."""
    idx = np.asarray(idx, dtype=np.intp)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def convolve_axis(arr, taps, step, axis):
    """Correlate ``arr`` along ``axis`` with ``taps`` dilated by ``step``.

    ``taps`` has odd length and is centred; tap ``k`` reads the sample at
    offset ``(k - len(taps) // 2) * step``, mirrored at the borders.
    """
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    taps = np.asarray(taps, dtype=np.float64)
    n = arr.shape[axis]
    half = len(taps) // 2
    positions = np.arange(n)
    out = np.zeros_like(arr)
    for k, t in enumerate(taps):
        src = reflect_index(positions + (k - half) * step, n)
        out += t * np.take(arr, src, axis=axis)
    return out


def window_moments(a, b, size, stride, rows_per_chunk=256):
    """Population moments of every full ``size x size`` window.

    Returns ``(mean_a, mean_b, var_a, var_b, cov)``, each of shape
    ``((h - size) // stride + 1, (w - size) // stride + 1)``. Each window is
    evaluated directly (two-pass), never by running sums.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    va = np.lib.stride_tricks.sliding_window_view(a, (size, size))[::stride, ::stride]
    vb = np.lib.stride_tricks.sliding_window_view(b, (size, size))[::stride, ::stride]
    ny, nx = va.shape[:2]
    out = np.empty((5, ny, nx))
    npix = size * size
    # chunk over window rows to bound the temporary (ny, nx, size, size) copies
    for r0 in range(0, ny, rows_per_chunk):
        r1 = min(ny, r0 + rows_per_chunk)
        wa = va[r0:r1]
        wb = vb[r0:r1]
        ma = wa.sum(axis=(2, 3)) / npix
        mb = wb.sum(axis=(2, 3)) / npix
        da = wa - ma[:, :, None, None]
        db = wb - mb[:, :, None, None]
        out[0, r0:r1] = ma
        out[1, r0:r1] = mb
        out[2, r0:r1] = (da * da).sum(axis=(2, 3)) / npix
        out[3, r0:r1] = (db * db).sum(axis=(2, 3)) / npix
        out[4, r0:r1] = (da * db).sum(axis=(2, 3)) / npix
    return tuple(out)

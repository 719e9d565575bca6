# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _reflect(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t period
    if n == 1:
        return 0
    period = 2 * (n - 1)
    i = i % period
    if i < 0:
        i += period
    if i >= n:
        i = period - i
    return i


def convolve_axis(arr, taps, Py_ssize_t step, int axis):
    cdef const double[:, ::1] src = np.ascontiguousarray(arr, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(taps, dtype=np.float64)
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef Py_ssize_t ntaps = t.shape[0], half = ntaps // 2
    cdef Py_ssize_t n = w if axis == 1 else h
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t[:, ::1] idx = np.empty((ntaps, n), dtype=np.intp)
    cdef Py_ssize_t i, j, k
    cdef double acc

    for k in range(ntaps):
        for i in range(n):
            idx[k, i] = _reflect(i + (k - half) * step, n)

    with nogil:
        if axis == 1:
            for i in range(h):
                for j in range(w):
                    acc = 0.0
                    for k in range(ntaps):
                        acc = acc + t[k] * src[i, idx[k, j]]
                    out[i, j] = acc
        else:
            for k in range(ntaps):
                for i in range(h):
                    for j in range(w):
                        out[i, j] = out[i, j] + t[k] * src[idx[k, i], j]
    return out_arr


def window_moments(a, b, Py_ssize_t size, Py_ssize_t stride):
    cdef const double[:, ::1] x = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] y = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    cdef Py_ssize_t ny = (h - size) // stride + 1
    cdef Py_ssize_t nx = (w - size) // stride + 1
    res = np.empty((5, ny, nx), dtype=np.float64)
    cdef double[:, :, ::1] out = res
    cdef double npix = <double>(size * size)
    cdef Py_ssize_t r, c, i, j, r0, c0
    cdef double sa, sb, ma, mb, da, db, saa, sbb, sab

    with nogil:
        for r in range(ny):
            r0 = r * stride
            for c in range(nx):
                c0 = c * stride
                sa = 0.0
                sb = 0.0
                for i in range(size):
                    for j in range(size):
                        sa = sa + x[r0 + i, c0 + j]
                        sb = sb + y[r0 + i, c0 + j]
                ma = sa / npix
                mb = sb / npix
                saa = 0.0
                sbb = 0.0
                sab = 0.0
                for i in range(size):
                    for j in range(size):
                        da = x[r0 + i, c0 + j] - ma
                        db = y[r0 + i, c0 + j] - mb
                        saa = saa + da * da
                        sbb = sbb + db * db
                        sab = sab + da * db
                out[0, r, c] = ma
                out[1, r, c] = mb
                out[2, r, c] = saa / npix
                out[3, r, c] = sbb / npix
                out[4, r, c] = sab / npix
    return tuple(res)

"""Raster containers, pixel arithmetic, resampling and degradation.

A *band* is a 2-D ``float64`` numpy array (rows x columns). A multispectral
image is a :class:`BandStack`. Every function here is pure: inputs are never
written to.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from bwfusion import _backend
from bwfusion._pykernels import reflect_index
from bwfusion.errors import NumericError, ParameterError, ShapeError

#: Cubic B3-spline scaling filter, shared by the wavelet and degradation code.
B3_TAPS = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

KERNELS = ("nearest", "bilinear", "bicubic")

# keep single dimensions addressable by 32-bit indices
_MAX_DIM = 2**31 - 1


def as_band(x, name="band"):
    """Validate ``x`` as a band and return it as a float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite samples")
    return arr


def check_same_shape(a, b, what="bands"):
    if a.shape != b.shape:
        raise ShapeError(f"{what} differ in shape: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class BandStack:
    """Co-registered bands stored as a read-only ``(bands, height, width)`` array."""

    data: np.ndarray
    names: Optional[tuple] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)  # private copy
        if data.ndim == 2:
            data = data[None]
        if data.ndim != 3:
            raise ShapeError(f"band stack needs shape (bands, h, w), got {data.shape}")
        if data.shape[0] < 1:
            raise ParameterError("a band stack needs at least one band")
        if data.shape[1] < 1 or data.shape[2] < 1:
            raise ShapeError(f"band stack has empty bands: {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NumericError("band stack contains non-finite samples")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != data.shape[0]:
                raise ShapeError(f"{len(names)} band names for {data.shape[0]} bands")
            object.__setattr__(self, "names", names)

    @classmethod
    def from_bands(cls, bands: Sequence, names=None):
        bands = [as_band(b, f"band {i}") for i, b in enumerate(bands)]
        if not bands:
            raise ParameterError("a band stack needs at least one band")
        for b in bands[1:]:
            check_same_shape(bands[0], b)
        return cls(np.stack(bands), names)

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, i):
        return self.data[i]

    def __iter__(self):
        return iter(self.data)

    @property
    def shape(self):
        """``(height, width)`` of every band."""
        return self.data.shape[1:]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    @property
    def band_names(self):
        if self.names is not None:
            return self.names
        return default_band_names(len(self))

    def map(self, f: Callable[[np.ndarray], np.ndarray]):
        """Apply ``f`` to every band, keeping the names."""
        return BandStack.from_bands([f(b) for b in self.data], self.names)


def default_band_names(n):
    if n == 4:
        return ("Red", "Green", "Blue", "NIR")
    if n == 3:
        return ("Red", "Green", "Blue")
    return tuple(f"band_{i + 1}" for i in range(n))


# --------------------------------------------------------------------------
# pixel arithmetic


def _checked(out):
    if not np.all(np.isfinite(out)):
        raise NumericError("pixel operation produced non-finite samples")
    return out


def band_map1(a, f):
    """Elementwise ``f(a)``; non-finite output raises :class:`NumericError`."""
    a = as_band(a)
    with np.errstate(all="ignore"):
        return _checked(np.asarray(f(a), dtype=np.float64))


def band_map2(a, b, f):
    """Elementwise ``f(a, b)`` over two bands of equal shape."""
    a = as_band(a)
    b = as_band(b)
    check_same_shape(a, b)
    with np.errstate(all="ignore"):
        out = np.asarray(f(a, b), dtype=np.float64)
    if out.shape != a.shape:
        raise ShapeError(f"pixel function changed shape {a.shape} -> {out.shape}")
    return _checked(out)


def band_fold(bands, f, initial=None):
    """Left fold of ``f`` over equally shaped bands (e.g. a pixelwise sum)."""
    bands = [as_band(b) for b in bands]
    if not bands:
        raise ParameterError("cannot fold an empty list of bands")
    acc = bands[0] if initial is None else as_band(initial)
    rest = bands[1:] if initial is None else bands
    for b in rest:
        acc = band_map2(acc, b, f)
    return acc


def add(a, b):
    return band_map2(a, b, np.add)


def sub(a, b):
    return band_map2(a, b, np.subtract)


def mul(a, b):
    return band_map2(a, b, np.multiply)


def div(a, b):
    return band_map2(a, b, np.divide)


# --------------------------------------------------------------------------
# filtering


def separable_filter(band, taps, step=1):
    """Separable mirror-boundary correlation with ``taps`` dilated by ``step``."""
    tmp = _backend.convolve_axis(band, taps, step, 1)
    return _backend.convolve_axis(tmp, taps, step, 0)


def b3_smooth(band, step=1):
    """One B3-spline smoothing pass with ``step - 1`` holes between taps."""
    return separable_filter(band, B3_TAPS, step)


def boxcar(band, size):
    """Mean over a ``size x size`` neighbourhood, mirrored at the borders."""
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"boxcar size must be odd and positive, got {size}")
    return separable_filter(as_band(band), np.full(size, 1.0 / size))


# --------------------------------------------------------------------------
# resampling


@dataclass(frozen=True)
class ResampleSpec:
    factor: int
    kernel: str = "bicubic"

    def __post_init__(self):
        if int(self.factor) != self.factor or self.factor < 1:
            raise ParameterError(f"resample factor must be a positive integer, got {self.factor}")
        if self.kernel not in KERNELS:
            raise ParameterError(f"unknown resampling kernel {self.kernel!r}; expected one of {KERNELS}")


def _cubic_weight(s, a=-0.5):
    s = np.abs(s)
    return np.where(
        s <= 1,
        (a + 2) * s**3 - (a + 3) * s**2 + 1,
        np.where(s < 2, a * s**3 - 5 * a * s**2 + 8 * a * s - 4 * a, 0.0),
    )


def _interp_matrix(n_in, factor, kernel):
    """Dense ``(n_in * factor, n_in)`` matrix mapping input samples to output samples.

    Output sample ``x`` sits at input coordinate ``x / factor``; taps falling
    outside the band are mirrored.
    """
    n_out = n_in * factor
    x = np.arange(n_out)
    mat = np.zeros((n_out, n_in))
    if kernel == "nearest":
        mat[x, x // factor] = 1.0
        return mat
    base = x // factor
    t = (x % factor) / factor
    if kernel == "bilinear":
        offsets = (0, 1)
        weights = (1.0 - t, t)
    else:
        offsets = (-1, 0, 1, 2)
        weights = tuple(_cubic_weight(t - o) for o in offsets)
    for o, wgt in zip(offsets, weights):
        src = reflect_index(base + o, n_in)
        np.add.at(mat, (x, src), wgt)
    return mat


def upsample(band, spec):
    """Enlarge ``band`` by ``spec.factor`` in both directions.

    ``spec`` may also be a bare integer factor (bicubic).
    """
    if not isinstance(spec, ResampleSpec):
        spec = ResampleSpec(spec)
    band = as_band(band)
    f = spec.factor
    h, w = band.shape
    if h * f > _MAX_DIM or w * f > _MAX_DIM:
        raise ShapeError(f"upsampled size {h * f}x{w * f} exceeds the supported maximum")
    if f == 1:
        return band.copy()
    rows = _interp_matrix(h, f, spec.kernel)
    cols = _interp_matrix(w, f, spec.kernel)
    return rows @ band @ cols.T


def upsample_stack(stack, spec):
    return stack.map(lambda b: upsample(b, spec))


def _log2_exact(factor, what="factor"):
    if int(factor) != factor or factor < 1 or (int(factor) & (int(factor) - 1)):
        raise ParameterError(f"{what} must be a power of two, got {factor}")
    return int(factor).bit_length() - 1


def degrade(band, factor):
    """Low-pass with cumulative B3 smoothing, then keep every ``factor``-th sample.

    The smoothing is the a trous low-pass at ``log2(factor)`` levels, so a
    degraded band is the decimated wavelet residual of the original.
    """
    band = as_band(band)
    levels = _log2_exact(factor)
    h, w = band.shape
    if h % factor or w % factor:
        raise ShapeError(f"band shape {band.shape} is not divisible by {factor}")
    smooth = band
    for j in range(levels):
        smooth = b3_smooth(smooth, 2**j)
    return np.ascontiguousarray(smooth[::factor, ::factor])


def degrade_stack(stack, factor):
    return stack.map(lambda b: degrade(b, factor))

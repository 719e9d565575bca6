"""Undecimated ("a trous") wavelet transform with the B3-spline kernel.

Level ``j`` smooths the previous approximation with the B3 kernel dilated
by ``2**(j-1)``; the detail plane is the difference between successive
approximations, so the residual plus all planes telescopes back to the
input exactly (up to rounding).
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from bwfusion.errors import ParameterError, ShapeError
from bwfusion.raster import as_band, b3_smooth


@dataclass(frozen=True)
class WaveletDecomposition:
    planes: tuple  # detail planes, finest first
    residual: np.ndarray

    def __post_init__(self):
        planes = tuple(np.asarray(p, dtype=np.float64) for p in self.planes)
        residual = np.asarray(self.residual, dtype=np.float64)
        if not planes:
            raise ParameterError("a decomposition needs at least one detail plane")
        for p in planes:
            if p.shape != residual.shape:
                raise ShapeError(f"plane shape {p.shape} differs from residual {residual.shape}")
        object.__setattr__(self, "planes", planes)
        object.__setattr__(self, "residual", residual)

    @property
    def levels(self):
        return len(self.planes)

    @property
    def shape(self):
        return self.residual.shape


def kernel_support(levels):
    """Width in pixels of the dilated B3 kernel at the deepest level."""
    return 4 * 2 ** (levels - 1) + 1


def max_levels(shape):
    """Deepest level whose dilated kernel still fits inside ``shape``."""
    m = min(shape)
    if m < 6:
        return 1
    return max(1, int(math.floor(math.log2(m - 1))) - 1)


def resolve_levels(levels, ratio):
    """Turn a level setting into a count.

    ``"auto"`` is the dyadic reading ``log2(ratio)``; ``"ratio"`` takes the
    resolution ratio itself as the number of planes.
    """
    if levels == "auto" or levels is None:
        return max(1, int(round(math.log2(ratio)))) if ratio > 1 else 1
    if levels == "ratio":
        return int(ratio)
    n = int(levels)
    if n != levels or n < 1:
        raise ParameterError(f"levels must be a positive integer, 'auto' or 'ratio', got {levels!r}")
    return n


def decompose(band, levels):
    band = as_band(band)
    if int(levels) != levels or levels < 1:
        raise ParameterError(f"levels must be >= 1, got {levels}")
    levels = int(levels)
    limit = max_levels(band.shape)
    if levels > limit:
        warnings.warn(
            f"{levels} levels need a {kernel_support(levels)}-pixel kernel but the band is "
            f"{band.shape[0]}x{band.shape[1]}; clamping to {limit}",
            RuntimeWarning,
            stacklevel=2,
        )
        levels = limit
    planes = []
    approx = band
    for j in range(levels):
        smoother = b3_smooth(approx, 2**j)
        planes.append(approx - smoother)
        approx = smoother
    return WaveletDecomposition(tuple(planes), approx)


def reconstruct(d):
    out = d.residual.copy()
    for p in d.planes:
        if p.shape != out.shape:
            raise ShapeError(f"plane shape {p.shape} differs from residual {out.shape}")
        out += p
    return out


def substitute_planes(target, source):
    """Detail planes of ``source`` on top of the residual of ``target``.

    No rescaling or histogram matching is applied to the grafted planes.
    """
    if target.levels != source.levels:
        raise ShapeError(f"level mismatch: {target.levels} vs {source.levels}")
    if target.shape != source.shape:
        raise ShapeError(f"shape mismatch: {target.shape} vs {source.shape}")
    return WaveletDecomposition(source.planes, target.residual)


def residual(band, levels):
    """Low-pass approximation of ``band`` after ``levels`` smoothing steps."""
    return decompose(band, levels).residual


def detail_sum(band, levels):
    """Sum of all detail planes, i.e. ``band - residual(band, levels)``."""
    band = as_band(band)
    return band - residual(band, levels)

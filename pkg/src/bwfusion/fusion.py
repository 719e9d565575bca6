"""Pansharpening fusers: Brovey, additive/substitutive a trous, Brovey-wavelet,
generalized IHS, PCA and high-pass filtering.

Every fuser takes a PAN band and an MS :class:`BandStack` already resampled
onto the PAN grid, and returns a :class:`FusionResult`. :func:`pansharpen`
does the resampling first.
"""
from dataclasses import asdict, dataclass, replace
from typing import Optional, Union

import numpy as np

from bwfusion import atrous
from bwfusion.errors import FusionError, NumericError, ParameterError, ShapeError
from bwfusion.raster import BandStack, ResampleSpec, as_band, boxcar, upsample_stack

METHODS = ("brovey", "aw", "sw", "bw", "ihs", "pca", "hpf")
PAN_MATCH = ("none", "mean_std")

# methods that take a pan_match setting, with their default
_PAN_MATCH_DEFAULT = {"aw": "mean_std", "sw": "mean_std", "bw": "none"}


@dataclass(frozen=True)
class FusionConfig:
    method: str = "bw"
    levels: Union[int, str] = "auto"
    ratio: int = 4
    denom_epsilon: Optional[float] = None  # None: 1e-6 x PAN dynamic range
    pan_match: Optional[str] = None  # None: per-method default
    hpf_kernel: Optional[int] = None  # None: 2 * ratio + 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if int(self.ratio) != self.ratio or self.ratio < 1:
            raise ParameterError(f"ratio must be a positive integer, got {self.ratio}")
        atrous.resolve_levels(self.levels, self.ratio)
        if self.denom_epsilon is not None and not self.denom_epsilon > 0:
            raise ParameterError(f"denom_epsilon must be > 0, got {self.denom_epsilon}")
        if self.pan_match is not None:
            if self.pan_match not in PAN_MATCH:
                raise ParameterError(f"pan_match must be one of {PAN_MATCH}, got {self.pan_match!r}")
            if self.method == "bw" and self.pan_match != "none":
                raise ParameterError("bw grafts Brovey detail without histogram matching; pan_match must be 'none'")
        if self.hpf_kernel is not None and (self.hpf_kernel < 3 or self.hpf_kernel % 2 == 0):
            raise ParameterError(f"hpf_kernel must be odd and >= 3, got {self.hpf_kernel}")

    @property
    def n_levels(self):
        return atrous.resolve_levels(self.levels, self.ratio)

    def resolved(self, pan):
        """Copy with every ``None``/``"auto"`` default replaced by its concrete value."""
        eps = self.denom_epsilon
        if eps is None:
            eps = default_epsilon(pan)
        return replace(
            self,
            levels=self.n_levels,
            denom_epsilon=float(eps),
            pan_match=self.pan_match or _PAN_MATCH_DEFAULT.get(self.method, "none"),
            hpf_kernel=self.hpf_kernel or 2 * self.ratio + 1,
        )

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class FusionResult:
    fused: BandStack
    method: str
    config_echo: FusionConfig


def default_epsilon(pan):
    pan = np.asarray(pan)
    span = float(pan.max() - pan.min())
    if span > 0:
        return 1e-6 * span
    return 1e-6 * max(float(np.abs(pan).max()), 1.0)


def match_mean_std(src, ref):
    """Shift and scale ``src`` to the population mean and std of ``ref``."""
    s_std = src.std()
    if s_std == 0:
        return np.full_like(src, ref.mean())
    return (src - src.mean()) * (ref.std() / s_std) + ref.mean()


def _prepare(pan, ms, cfg, method):
    pan = as_band(pan, "PAN")
    if not isinstance(ms, BandStack):
        ms = BandStack(ms)
    if ms.shape != pan.shape:
        raise ShapeError(f"MS bands {ms.shape} must already be on the PAN grid {pan.shape}")
    if cfg is None:
        cfg = FusionConfig(method=method)
    elif cfg.method != method:
        cfg = replace(cfg, method=method)
    return pan, ms, cfg.resolved(pan)


def _result(bands, ms, cfg):
    fused = np.stack(bands)
    if not np.all(np.isfinite(fused)):
        raise NumericError(f"{cfg.method} fusion produced non-finite samples")
    return FusionResult(BandStack(fused, ms.names), cfg.method, cfg)


def brovey_bands(pan, ms_data, eps):
    """``PAN / mean(MS) * MS_i``; zero wherever the band mean is <= ``eps``."""
    m = ms_data.mean(axis=0)
    ok = m > eps
    gain = np.divide(pan, m, out=np.zeros_like(pan), where=ok)
    return gain[None] * ms_data


def fuse_brovey(pan, ms, cfg=None):
    pan, ms, cfg = _prepare(pan, ms, cfg, "brovey")
    return _result(list(brovey_bands(pan, ms.data, cfg.denom_epsilon)), ms, cfg)


def _pan_for_band(pan, band, cfg):
    if cfg.pan_match == "mean_std":
        return match_mean_std(pan, band)
    return pan


def fuse_aw(pan, ms, cfg=None):
    """Add the PAN detail planes to every MS band."""
    pan, ms, cfg = _prepare(pan, ms, cfg, "aw")
    out = []
    detail = None
    for band in ms:
        if detail is None or cfg.pan_match != "none":
            detail = atrous.detail_sum(_pan_for_band(pan, band, cfg), cfg.levels)
        out.append(band + detail)
    return _result(out, ms, cfg)


def fuse_sw(pan, ms, cfg=None):
    """Replace the MS detail planes with the PAN detail planes."""
    pan, ms, cfg = _prepare(pan, ms, cfg, "sw")
    out = []
    for band in ms:
        p = _pan_for_band(pan, band, cfg)
        d_pan = atrous.decompose(p, cfg.levels)
        d_ms = atrous.decompose(band, cfg.levels)
        out.append(atrous.reconstruct(atrous.substitute_planes(d_ms, d_pan)))
    return _result(out, ms, cfg)


def fuse_bw(pan, ms, cfg=None):
    """Brovey-wavelet hybrid.

    Each band is Brovey-sharpened, then the Brovey band's detail planes
    replace the detail planes of the resampled MS band. The MS residual is
    kept as is, so the low-frequency content of every band is untouched.
    """
    pan, ms, cfg = _prepare(pan, ms, cfg, "bw")
    sharpened = brovey_bands(pan, ms.data, cfg.denom_epsilon)
    out = []
    for band, b in zip(ms, sharpened):
        d_b = atrous.decompose(b, cfg.levels)
        d_ms = atrous.decompose(band, cfg.levels)
        out.append(atrous.reconstruct(atrous.substitute_planes(d_ms, d_b)))
    return _result(out, ms, cfg)


def fuse_ihs(pan, ms, cfg=None):
    """Generalized IHS: add ``PAN' - I`` to every band, ``I`` the band mean."""
    pan, ms, cfg = _prepare(pan, ms, cfg, "ihs")
    intensity = ms.data.mean(axis=0)
    delta = match_mean_std(pan, intensity) - intensity
    return _result([band + delta for band in ms], ms, cfg)


def pca_forward(data):
    """Principal components of a ``(bands, h, w)`` array.

    Returns ``(components, vectors, means)`` where ``components`` has the
    input's shape and ``vectors[:, k]`` is the k-th eigenvector. Eigenvectors
    are ordered by decreasing eigenvalue and signed so their entries sum to
    a non-negative number.
    """
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    flat = data.reshape(n, -1)
    means = flat.mean(axis=1)
    centred = flat - means[:, None]
    cov = centred @ centred.T / flat.shape[1]
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    scale = max(abs(values[0]), np.finfo(float).tiny)
    for k, v in enumerate(values):
        if v <= 1e-12 * scale:
            raise NumericError(
                f"band covariance is rank deficient: eigenvalue {k + 1} of {n} is {v:.3e} "
                f"(largest {values[0]:.3e})"
            )
    signs = np.where(vectors.sum(axis=0) < 0, -1.0, 1.0)
    vectors = vectors * signs
    components = (vectors.T @ centred).reshape(data.shape)
    return components, vectors, means


def pca_inverse(components, vectors, means):
    n = components.shape[0]
    flat = vectors @ components.reshape(n, -1) + means[:, None]
    return flat.reshape(components.shape)


def fuse_pca(pan, ms, cfg=None):
    pan, ms, cfg = _prepare(pan, ms, cfg, "pca")
    if len(ms) < 2:
        raise ParameterError("PCA fusion needs at least two bands")
    comps, vectors, means = pca_forward(ms.data)
    comps = comps.copy()
    comps[0] = match_mean_std(pan, comps[0])
    return _result(list(pca_inverse(comps, vectors, means)), ms, cfg)


def fuse_hpf(pan, ms, cfg=None):
    """Add the box-car high-pass of PAN to every band."""
    pan, ms, cfg = _prepare(pan, ms, cfg, "hpf")
    high = pan - boxcar(pan, cfg.hpf_kernel)
    return _result([band + high for band in ms], ms, cfg)


FUSERS = {
    "brovey": fuse_brovey,
    "aw": fuse_aw,
    "sw": fuse_sw,
    "bw": fuse_bw,
    "ihs": fuse_ihs,
    "pca": fuse_pca,
    "hpf": fuse_hpf,
}


def fuse(pan, ms, cfg):
    """Run ``cfg.method`` on MS bands already on the PAN grid."""
    return FUSERS[cfg.method](pan, ms, cfg)


def pansharpen(pan, ms, cfg, kernel="bicubic"):
    """Resample low-resolution ``ms`` onto the PAN grid, then fuse.

    ``ms`` that already matches the PAN shape is used as is.
    """
    pan = as_band(pan, "PAN")
    if not isinstance(ms, BandStack):
        ms = BandStack(ms)
    if ms.shape != pan.shape:
        expected = (ms.height * cfg.ratio, ms.width * cfg.ratio)
        if expected != pan.shape:
            raise ShapeError(
                f"MS {ms.shape} upsampled by {cfg.ratio} gives {expected}, PAN is {pan.shape}"
            )
        ms = upsample_stack(ms, ResampleSpec(cfg.ratio, kernel))
    try:
        return fuse(pan, ms, cfg)
    except FusionError as exc:
        raise type(exc)(f"[{cfg.method}] {exc}") from exc

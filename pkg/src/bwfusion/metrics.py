"""Correlation coefficient and universal image quality index, global and
averaged over a sliding window.

All moments are population moments (divided by the pixel count).
"""
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from bwfusion import _backend
from bwfusion.errors import ParameterError, ShapeError
from bwfusion.raster import BandStack, as_band, check_same_shape

METRICS = ("cc", "uiqi")

# a variance this small relative to the squared mean is rounding noise
# from a constant window, not signal
_ZERO_VAR_RTOL = 1e-24


def _is_zero_var(var, mean):
    return var <= _ZERO_VAR_RTOL * mean * mean


def _moments(a, b):
    a = as_band(a)
    b = as_band(b)
    check_same_shape(a, b)
    if a.size < 2:
        raise ParameterError("metrics need at least two pixels")
    ma = a.mean()
    mb = b.mean()
    da = a - ma
    db = b - mb
    return ma, mb, (da * da).mean(), (db * db).mean(), (da * db).mean(), a, b


def cc(a, b):
    """Pearson correlation of two bands.

    Two identical constant bands score 1; a constant band against anything
    else scores 0.
    """
    ma, mb, va, vb, cov, a, b = _moments(a, b)
    za, zb = _is_zero_var(va, ma), _is_zero_var(vb, mb)
    if za or zb:
        return 1.0 if (za and zb and ma == mb) else 0.0
    return float(cov / np.sqrt(va * vb))


def uiqi(a, b):
    """Universal image quality index: correlation x luminance x contrast.

    Degenerate factors follow :func:`cc` for the correlation term; the
    luminance and contrast terms are 1 when both of their denominators'
    inputs vanish (two zero means, two zero variances).
    """
    ma, mb, va, vb, cov, a, b = _moments(a, b)
    za, zb = _is_zero_var(va, ma), _is_zero_var(vb, mb)
    if za or zb:
        corr = 1.0 if (za and zb and ma == mb) else 0.0
        contrast = 1.0 if (za and zb) else 0.0
    else:
        sa, sb = np.sqrt(va), np.sqrt(vb)
        corr = cov / (sa * sb)
        contrast = 2 * sa * sb / (va + vb)
    lum_den = ma * ma + mb * mb
    luminance = 1.0 if lum_den == 0 else 2 * ma * mb / lum_den
    return float(corr * luminance * contrast)


SCALAR_METRICS = {"cc": cc, "uiqi": uiqi}


@dataclass(frozen=True)
class WindowSpec:
    size: int = 8
    stride: int = 1

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise ParameterError(f"window size must be an integer >= 2, got {self.size}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ParameterError(f"window stride must be an integer >= 1, got {self.stride}")

    def check_fits(self, shape):
        if self.size > min(shape):
            raise ParameterError(f"window {self.size} is larger than the image {shape[0]}x{shape[1]}")


@dataclass(frozen=True)
class WindowedValue:
    value: float
    windows: int  # windows averaged
    skipped: int  # degenerate windows left out


def window_values(a, b, w, metric):
    """Per-window metric values and the mask of usable windows.

    A window is degenerate (mask False) when either band has zero variance
    in it, or, for UIQI, when both window means are zero.
    """
    if metric not in METRICS:
        raise ParameterError(f"unknown metric {metric!r}; expected one of {METRICS}")
    a = as_band(a)
    b = as_band(b)
    check_same_shape(a, b)
    w.check_fits(a.shape)
    ma, mb, va, vb, cov = _backend.window_moments(a, b, w.size, w.stride)
    ok = ~(_is_zero_var(va, ma) | _is_zero_var(vb, mb))
    lum_den = ma * ma + mb * mb
    if metric == "uiqi":
        ok &= lum_den > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        if metric == "cc":
            vals = cov / np.sqrt(va * vb)
        else:
            vals = 4 * cov * ma * mb / ((va + vb) * lum_den)
    return np.where(ok, vals, np.nan), ok


def windowed_metric_detail(a, b, w=None, metric="cc"):
    w = w or WindowSpec()
    vals, ok = window_values(a, b, w, metric)
    n_ok = int(ok.sum())
    skipped = int(ok.size - n_ok)
    if n_ok == 0:
        # nothing but flat windows: fall back to the whole-image convention
        return WindowedValue(SCALAR_METRICS[metric](a, b), 0, skipped)
    return WindowedValue(float(vals[ok].mean()), n_ok, skipped)


def windowed_metric(a, b, w=None, metric="cc"):
    """Average of ``metric`` over every full window, degenerate windows excluded."""
    return windowed_metric_detail(a, b, w, metric).value


@dataclass(frozen=True)
class BandQuality:
    band_name: str
    cc: float
    uiqi: float
    cc_skipped: int = 0
    uiqi_skipped: int = 0


@dataclass(frozen=True)
class QualityReport:
    per_band: tuple
    window: WindowSpec = field(default_factory=WindowSpec)

    @property
    def mean_cc(self):
        return float(np.mean([q.cc for q in self.per_band]))

    @property
    def mean_uiqi(self):
        return float(np.mean([q.uiqi for q in self.per_band]))

    def to_dict(self):
        return {
            "window": {"size": self.window.size, "stride": self.window.stride},
            "per_band": [vars(q) for q in self.per_band],
            "mean_cc": self.mean_cc,
            "mean_uiqi": self.mean_uiqi,
        }


def evaluate_stack(fused, reference, w=None):
    """Windowed CC and UIQI of every fused band against its reference band."""
    w = w or WindowSpec()
    if not isinstance(fused, BandStack):
        fused = BandStack(fused)
    if not isinstance(reference, BandStack):
        reference = BandStack(reference)
    if len(fused) != len(reference):
        raise ShapeError(f"band count mismatch: {len(fused)} fused vs {len(reference)} reference")
    if fused.shape != reference.shape:
        raise ShapeError(f"stack shapes differ: {fused.shape} vs {reference.shape}")
    rows = []
    for name, f, r in zip(reference.band_names, fused, reference):
        c = windowed_metric_detail(f, r, w, "cc")
        q = windowed_metric_detail(f, r, w, "uiqi")
        rows.append(BandQuality(name, c.value, q.value, c.skipped, q.skipped))
    return QualityReport(tuple(rows), w)


CSV_HEADER = ("band", "method", "cc", "uiqi")


def reports_to_csv(reports):
    """Render ``{method: QualityReport}`` as CSV text, one row per band plus a Mean row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for method, report in reports.items():
        for q in report.per_band:
            writer.writerow([q.band_name, method, f"{q.cc:.4f}", f"{q.uiqi:.4f}"])
        writer.writerow(["Mean", method, f"{report.mean_cc:.4f}", f"{report.mean_uiqi:.4f}"])
    return buf.getvalue()


def read_csv_report(text):
    """Parse CSV produced by :func:`reports_to_csv` into ``{method: {band: (cc, uiqi)}}``."""
    out = {}
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ParameterError(f"unexpected CSV header {reader.fieldnames}")
    for row in reader:
        out.setdefault(row["method"], {})[row["band"]] = (float(row["cc"]), float(row["uiqi"]))
    return out

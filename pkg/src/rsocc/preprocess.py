"""
Receiver front end: column selection, normalisation, histogram equalisation,
header-based stripe-width estimation and odd-width resampling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from rsocc.camera import Frame, GrayColumn
from rsocc.errors import DegenerateSignal, HeaderNotFound, InvalidArgument
from rsocc.modulation import PacketSpec


@dataclass(frozen=True)
class WidthEstimate:
    """Stripe geometry measured from the synchronisation header.

    Attributes:
        W: measured rows per symbol.
        X: odd integer rows per symbol targeted by resampling.
        resample_factor: X / W.
        header_start: leading row of the first header stripe found, placed
            so that ``header_start + X // 2`` is that stripe's extremum.
    """

    W: float
    X: int
    resample_factor: float
    header_start: int

    def __post_init__(self):
        if self.X < 3 or self.X % 2 == 0:
            raise InvalidArgument(f"X must be odd and >= 3, got {self.X}")
        if self.resample_factor <= 0 or self.W <= 0:
            raise InvalidArgument("W and resample_factor must be positive")

    def in_resampled_rows(self) -> "WidthEstimate":
        """The same estimate expressed on the column after resampling."""
        f = self.resample_factor
        centre = (self.header_start + self.X // 2) * f
        return replace(self, W=float(self.X), resample_factor=1.0,
                       header_start=int(round(centre)) - self.X // 2)

    def to_csv_row(self) -> str:
        return f"{float(self.W)!r},{self.X},{float(self.resample_factor)!r},{self.header_start}"

    @classmethod
    def from_csv_row(cls, line: str) -> "WidthEstimate":
        w, x, f, h = line.strip().split(",")
        return cls(float(w), int(x), float(f), int(h))


def odd_width(W: float) -> int:
    """Smallest odd integer >= round(W), never below 3."""
    x = max(int(round(W)), 3)
    return x if x % 2 else x + 1


def select_column(frame: Frame) -> GrayColumn:
    """Column with the largest variance; ties go to the lowest index."""
    var = frame.pixels.astype(float).var(axis=0)
    return frame.column(int(np.argmax(var)))


def normalize(col: GrayColumn) -> GrayColumn:
    v = col.values
    lo, hi = v.min(), v.max()
    if not hi > lo:
        raise DegenerateSignal("cannot normalise a constant column")
    out = (v - lo) / (hi - lo)
    return GrayColumn(np.clip(out, 0.0, 1.0), normalized=True, interp_factor=col.interp_factor)


def noise_sigma(col: GrayColumn) -> float:
    """Robust white-noise level from second differences (zero on piecewise-linear columns)."""
    d2 = np.diff(np.asarray(col.values, dtype=float), 2)
    if d2.size == 0:
        return 0.0
    return float(np.median(np.abs(d2)) / (0.6745 * np.sqrt(6.0)))


def equalize_histogram(col: GrayColumn, bins: int = 256) -> GrayColumn:
    """Remap each value to the empirical CDF of its bin (output in (0, 1])."""
    v = np.clip(col.values, 0.0, 1.0)
    idx = np.minimum((v * bins).astype(np.int64), bins - 1)
    cdf = np.cumsum(np.bincount(idx, minlength=bins)) / v.size
    return GrayColumn(cdf[idx], normalized=True, interp_factor=col.interp_factor)


def _crossings(v: np.ndarray, level: float) -> np.ndarray:
    above = v >= level
    i = np.flatnonzero(above[1:] != above[:-1])
    return i + (level - v[i]) / (v[i + 1] - v[i])


def _stripe_extremum(seg: np.ndarray, high: bool) -> float:
    """Centre of the samples equal to the segment's extreme value."""
    ext = seg.max() if high else seg.min()
    return float(np.flatnonzero(np.abs(seg - ext) <= 1e-12).mean())


def estimate_stripe_width(col: GrayColumn, spec: PacketSpec, level: float = 0.5,
                          swing: float = 0.25, tolerance: float = 0.25) -> WidthEstimate:
    """Measure rows per symbol from the first full-swing alternating run.

    A header of n symbols yields n - 2 stripes bounded by mid-level crossings
    on both sides. The first window of that many consecutive stripes whose
    widths agree within ``tolerance`` and whose extremes reach within
    ``swing`` of 1 (high stripes) or 0 (low stripes) is taken as the header.
    W is the slope of a line fitted through the stripe extrema.
    """
    v = col.values
    c = _crossings(v, level)
    n_int = spec.header_len - 2
    if n_int < 1 or c.size < n_int + 1:
        raise HeaderNotFound("not enough level crossings for a header")
    widths = np.diff(c)
    full = np.zeros(widths.size, dtype=bool)
    highs = np.zeros(widths.size, dtype=bool)
    for j in range(widths.size):
        lo, hi = int(np.floor(c[j])) + 1, int(np.floor(c[j + 1])) + 1
        seg = v[lo:hi]
        if seg.size == 0:
            continue
        highs[j] = v[lo] >= level
        full[j] = seg.max() >= 1 - swing if highs[j] else seg.min() <= swing

    for j in range(widths.size - n_int + 1):
        win = widths[j:j + n_int]
        med = np.median(win)
        if med < 2 or not full[j:j + n_int].all():
            continue
        if np.any(np.abs(win - med) > tolerance * med):
            continue
        ext = []
        for s in range(j, j + n_int):
            lo, hi = int(np.floor(c[s])) + 1, int(np.floor(c[s + 1])) + 1
            ext.append(lo + _stripe_extremum(v[lo:hi], highs[s]))
        # stripe extrema sit one symbol apart; edge crossings are biased by the neighbours
        W, phase = (float(x) for x in np.polyfit(np.arange(n_int), ext, 1))
        if not highs[j]:
            # the header opens with a bright stripe; an unbounded one precedes this run
            phase -= W
        X = odd_width(W)
        return WidthEstimate(W, X, X / W, int(round(phase)) - X // 2)
    raise HeaderNotFound("no alternating full-swing run as long as the header")


def resample_to_odd_width(col: GrayColumn, est: WidthEstimate) -> GrayColumn:
    """Linear-interpolation resampling by ``est.resample_factor``."""
    f = est.resample_factor
    n = len(col)
    if f == 1.0:
        return GrayColumn(col.values.copy(), col.normalized, col.interp_factor)
    new_len = max(int(round(n * f)), 1)
    x = np.arange(new_len) / f
    vals = np.interp(x, np.arange(n), col.values)
    return GrayColumn(vals, col.normalized, col.interp_factor * f)


def write_estimate(path, est: WidthEstimate) -> None:
    Path(path).write_text("W,X,resample_factor,header_start\n" + est.to_csv_row() + "\n")

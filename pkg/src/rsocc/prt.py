"""
Polarity-reversal thresholding for M-ary stripe columns.

A cubic fit of the column gives the middle threshold. Reflecting the samples
below it upward (or those above it downward) and refitting gives the upper
and lower thresholds; clamping the column to those and fitting once more
refines them. Orders above 4 interpolate the remaining thresholds linearly
between the middle and the refined outer curves.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from rsocc.camera import GrayColumn
from rsocc.errors import InvalidArgument


@dataclass(frozen=True)
class ThresholdCurve:
    """Cubic threshold over normalised row position x = i / (n - 1)."""

    coeffs: np.ndarray
    values: np.ndarray

    def at(self, rows) -> np.ndarray:
        return np.interp(rows, np.arange(self.values.size), self.values)


@dataclass(frozen=True)
class ThresholdSet:
    """M - 1 per-row thresholds, ``curves[k, i] <= curves[k + 1, i]``."""

    M: int
    curves: np.ndarray
    labels: tuple

    def __post_init__(self):
        if self.curves.shape[0] != self.M - 1:
            raise InvalidArgument(f"expected {self.M - 1} curves, got {self.curves.shape[0]}")

    @property
    def rows(self) -> int:
        return self.curves.shape[1]

    def at(self, rows) -> np.ndarray:
        """Thresholds at (possibly fractional) rows, shape (M - 1, len(rows))."""
        grid = np.arange(self.rows)
        return np.stack([np.interp(rows, grid, c) for c in self.curves])

    def to_csv(self, path) -> None:
        header = "row," + ",".join(self.labels)
        lines = [header] + [
            f"{i}," + ",".join(repr(float(x)) for x in self.curves[:, i]) for i in range(self.rows)]
        Path(path).write_text("\n".join(lines) + "\n")


def _values(col) -> np.ndarray:
    return col.values if isinstance(col, GrayColumn) else np.asarray(col, dtype=float)


def row_positions(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)


def fit_cubic(col) -> ThresholdCurve:
    """Least-squares cubic through the column, rows mapped onto [0, 1]."""
    y = _values(col)
    if y.size < 4:
        raise InvalidArgument("cubic fit needs at least 4 rows")
    x = row_positions(y.size)
    coeffs = P.polyfit(x, y, 3)
    return ThresholdCurve(coeffs, P.polyval(x, coeffs))


def reflect_low(p: np.ndarray, th: np.ndarray) -> np.ndarray:
    """Mirror samples below ``th`` onto the upper side."""
    return np.where(p < th, 2 * th - p, p)


def reflect_high(p: np.ndarray, th: np.ndarray) -> np.ndarray:
    """Mirror samples at or above ``th`` onto the lower side."""
    return np.where(p < th, p, 2 * th - p)


def clamp_up(p: np.ndarray, th: np.ndarray) -> np.ndarray:
    return np.where(p < th, th, p)


def clamp_down(p: np.ndarray, th: np.ndarray) -> np.ndarray:
    return np.where(p < th, p, th)


def expand_thresholds(th_low, th_m, th_high, M: int) -> tuple[np.ndarray, tuple]:
    """Full ascending stack of M - 1 curves from the three PRT curves.

    For M > 4 the extra curves are ``th_m +/- m * gap / ((M - 2) / 2)`` with
    m = 1 .. (M - 4) / 2, where gap is the distance to the outer curve.
    """
    if M < 4 or M % 2:
        raise InvalidArgument("expand_thresholds needs an even M >= 4")
    th_low, th_m, th_high = (np.asarray(t, dtype=float) for t in (th_low, th_m, th_high))
    half = (M - 2) / 2
    ms = range(1, (M - 4) // 2 + 1)
    upper = [th_m + m * (th_high - th_m) / half for m in ms]
    lower = [th_m - m * (th_m - th_low) / half for m in ms]
    curves = [th_low, *reversed(lower), th_m, *upper, th_high]
    labels = (["low"] + [f"low+{m}" for m in reversed(ms)] + ["mid"]
              + [f"mid+{m}" for m in ms] + ["high"])
    return np.stack(curves), tuple(labels)


def prt_thresholds(col, M: int = 4) -> ThresholdSet:
    if M < 2 or M % 2:
        raise InvalidArgument(f"M must be even and >= 2, got {M}")
    p = _values(col)
    th_m = fit_cubic(p).values
    if M == 2:
        return ThresholdSet(2, th_m[None, :], ("mid",))

    th_h = fit_cubic(reflect_low(p, th_m)).values
    th_l = fit_cubic(reflect_high(p, th_m)).values
    th_high = fit_cubic(clamp_up(p, th_h)).values
    th_low = fit_cubic(clamp_down(p, th_l)).values

    curves, labels = expand_thresholds(th_low, th_m, th_high, M)
    # LS fits of ordered data need not stay ordered; keep outer curves on their side of mid
    mid = (M - 2) // 2
    curves[:mid] = np.minimum(curves[:mid], th_m)
    curves[mid + 1:] = np.maximum(curves[mid + 1:], th_m)
    curves = np.sort(curves, axis=0)
    return ThresholdSet(M, curves, labels)


def classify(value: float, row, ts: ThresholdSet) -> int:
    """Number of curves at or below ``value`` at ``row`` (ties resolve upward)."""
    th = ts.at(np.atleast_1d(float(row)))[:, 0]
    return int(np.count_nonzero(th <= value))


def classify_rows(values, rows, ts: ThresholdSet) -> np.ndarray:
    th = ts.at(np.asarray(rows, dtype=float))
    return np.count_nonzero(th <= np.asarray(values, dtype=float)[None, :], axis=0)

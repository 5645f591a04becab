"""
Symbol sampling: the adaptive sampling method (ASM) and a clock-recovery
(CR) baseline.

ASM anchors on pairs of neighbouring extrema spaced about one stripe apart,
stretches or shrinks each inter-anchor segment to a whole number of stripes
of odd width X, and samples every X rows from each anchor. CR samples at a
fixed stride from the synchronisation header to the end of the column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from rsocc.camera import GrayColumn
from rsocc.errors import InsufficientExtrema, InvalidArgument
from rsocc.preprocess import WidthEstimate

ASM = "ASM"
CR = "CR"


@dataclass(frozen=True)
class ExtremaList:
    positions: np.ndarray
    kinds: np.ndarray  # +1 maximum, -1 minimum

    def __len__(self):
        return int(self.positions.size)


@dataclass(frozen=True)
class AuxiliaryExtrema:
    positions: np.ndarray

    @property
    def count(self) -> int:
        return int(self.positions.size)


@dataclass
class SamplePlan:
    """Where to read symbols.

    ``positions`` index the (possibly rescaled) sequence in ``values``;
    ``source_rows`` map each sample back onto rows of the input column so
    per-row thresholds can be looked up. ``segments`` holds (k, Ratio) per
    ASM segment; ``boundaries`` the FL_new anchor positions.
    """

    positions: np.ndarray
    values: np.ndarray
    source_rows: np.ndarray
    method: str
    X: int
    segments: list = field(default_factory=list)
    boundaries: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def to_csv(self, path) -> None:
        seg_of = np.full(self.positions.size, -1)
        if self.method == ASM and self.boundaries.size:
            seg_of = np.searchsorted(self.boundaries, self.positions, side="right") - 1
        lines = ["position,source_row,gray,k,ratio"]
        for i, (p, r, g) in enumerate(zip(self.positions, self.source_rows, self.values)):
            s = seg_of[i]
            k, ratio = self.segments[s] if 0 <= s < len(self.segments) else ("", "")
            lines.append(f"{int(p)},{float(r)!r},{float(g)!r},{k},{ratio!r}" if k != ""
                         else f"{int(p)},{float(r)!r},{float(g)!r},,")
        Path(path).write_text("\n".join(lines) + "\n")


def _values(col) -> np.ndarray:
    return col.values if isinstance(col, GrayColumn) else np.asarray(col, dtype=float)


PLATEAU_RULES = ("center", "left", "right")


def find_local_extrema(col, min_prominence: float = 0.1, plateau: str = "center") -> ExtremaList:
    """Interior maxima and minima with at least ``min_prominence``.

    A flat extremum reports one index chosen by ``plateau``: its middle
    (rounded down), its first or its last sample.
    """
    if plateau not in PLATEAU_RULES:
        raise InvalidArgument(f"plateau must be one of {PLATEAU_RULES}, got {plateau!r}")
    v = _values(col)
    if v.size < 3:
        raise InvalidArgument("need at least 3 samples")
    found = []
    for sign in (1, -1):
        mid, props = find_peaks(sign * v, prominence=min_prominence, plateau_size=1)
        pos = {"center": mid, "left": props["left_edges"], "right": props["right_edges"]}[plateau]
        found.append((pos, np.full(pos.size, sign, dtype=np.int8)))
    pos = np.concatenate([f[0] for f in found])
    kinds = np.concatenate([f[1] for f in found])
    order = np.argsort(pos, kind="stable")
    return ExtremaList(pos[order].astype(np.int64), kinds[order])


def sharp_extrema(ext: ExtremaList, col, reach: int, min_sharpness: float) -> ExtremaList:
    """Keep extrema that stand ``min_sharpness`` clear of the samples ``reach`` rows away.

    An extremum with a flat flank can sit anywhere along that flank once noise
    is added, so its position says little about where the stripe edge is.
    """
    v = _values(col)
    p = ext.positions
    left = v[np.maximum(p - reach, 0)]
    right = v[np.minimum(p + reach, v.size - 1)]
    depth = ext.kinds * (v[p] - np.where(ext.kinds > 0, np.maximum(left, right),
                                         np.minimum(left, right)))
    keep = depth >= min_sharpness
    return ExtremaList(p[keep], ext.kinds[keep])


def admission_window(X: int) -> tuple[int, int]:
    return -(-X // 2), (3 * X) // 2


def auxiliary_extrema(ext: ExtremaList, X: int) -> AuxiliaryExtrema:
    """Keep both ends of every extremum gap lying in [ceil(X/2), floor(3X/2)]."""
    if X < 3 or X % 2 == 0:
        raise InvalidArgument("X must be odd and >= 3")
    L = ext.positions
    lo, hi = admission_window(X)
    gaps = np.diff(L)
    ok = np.flatnonzero((gaps >= lo) & (gaps <= hi))
    fl = np.unique(np.concatenate([L[ok], L[ok + 1]]))
    # points admitted from different pairs can sit closer than the window allows
    keep = [0] if fl.size else []
    for i in range(1, fl.size):
        if fl[i] - fl[keep[-1]] >= lo:
            keep.append(i)
    fl = fl[keep]
    if fl.size < 2:
        raise InsufficientExtrema(f"only {fl.size} auxiliary extrema admitted")
    return AuxiliaryExtrema(fl)


def best_multiple(delta: int, X: int, N: int) -> int:
    """argmin over k in [1, N] of (delta - k*X)**2, ties to the smaller k."""
    k = np.arange(1, N + 1)
    return int(k[np.argmin((delta - k * X) ** 2)])


def segment_rescale(segment, k: int, X: int, next_extremum: float) -> np.ndarray:
    """Bring a segment of ``delta`` samples to exactly ``k * X`` samples.

    Output sample i is read at input offset ``i * delta / (k*X)``: linear
    interpolation when stretching, evenly spaced picks when shrinking, a plain
    copy at Ratio == 1. The last sample is then replaced by ``next_extremum``.
    """
    seg = np.asarray(segment, dtype=float)
    delta = seg.size
    if delta < 2 or k < 1:
        raise InvalidArgument("segment needs >= 2 samples and k >= 1")
    n = k * X
    if n == delta:
        out = seg.copy()
    elif n > delta:
        ext = np.append(seg, next_extremum)
        out = np.interp(np.arange(n) * delta / n, np.arange(delta + 1), ext)
    else:
        keep = np.rint(np.arange(n) * delta / n).astype(np.int64)
        out = seg[keep]
    out[-1] = next_extremum
    return out


def asm_sample(col, X: int, N: int = 16, min_prominence: float = 0.1,
               plateau: str = "center", min_sharpness: float = 0.0) -> SamplePlan:
    """Anchor on auxiliary extrema, rescale each segment to k*X rows, sample every X.

    ``min_sharpness`` > 0 first drops extrema that do not stand that far above
    (or below) both samples X//2 rows away.
    """
    v = _values(col)
    ext = find_local_extrema(v, min_prominence, plateau)
    if min_sharpness > 0:
        ext = sharp_extrema(ext, v, X // 2, min_sharpness)
    fl = auxiliary_extrema(ext, X).positions
    rows = np.arange(v.size, dtype=float)

    pieces, sources, segments = [], [], []
    bounds = [0]
    for j in range(fl.size - 1):
        a, b = int(fl[j]), int(fl[j + 1])
        delta = b - a
        k = best_multiple(delta, X, N)
        pieces.append(segment_rescale(v[a:b], k, X, v[b]))
        sources.append(segment_rescale(rows[a:b], k, X, float(b)))
        segments.append((k, k * X / delta))
        bounds.append(bounds[-1] + k * X)
    # terminal anchor so the last boundary indexes a real sample
    pieces.append(v[fl[-1:]])
    sources.append(rows[fl[-1:]])
    seq = np.concatenate(pieces)
    src = np.concatenate(sources)
    fl_new = np.asarray(bounds[1:], dtype=np.int64)

    pos = []
    for m in range(fl_new.size - 1):
        k = segments[m + 1][0]
        pos.extend(fl_new[m] + beta * X for beta in range(k))
    pos.append(fl_new[-1])
    pos = np.asarray(pos, dtype=np.int64)
    return SamplePlan(pos, seq[pos], src[pos], ASM, X, segments, fl_new)


def cr_sample(col, est: WidthEstimate) -> SamplePlan:
    """Fixed stride X from the header's first stripe to the end of the column."""
    v = _values(col)
    pos = np.arange(est.header_start + est.X // 2, v.size, est.X, dtype=np.int64)
    pos = pos[pos >= 0]
    return SamplePlan(pos, v[pos], pos.astype(float), CR, est.X)

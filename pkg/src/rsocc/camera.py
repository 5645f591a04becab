"""
Rolling-shutter camera channel.

Each sensor row opens its exposure window ``t_row`` later than the previous
one, so a fast-blinking source is painted as horizontal stripes. The model
here is, per row r::

    start_r = t_start + r * t_row * (1 + drift_ppm * 1e-6) + jitter_r
    gray(r) = Q(envelope(r) * mean(led(w) over [start_r, start_r + t_exp]) / full_scale
                + noise)

with ``Q`` clipping to [0, 1] and quantising to ``quantize_bits``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.signal import lfilter, lfilter_zi

from rsocc.errors import InvalidArgument
from rsocc.modulation import Waveform


@dataclass(frozen=True)
class ChannelConfig:
    """Camera and optical-channel parameters.

    The defaults describe the reference link: 250 us exposure and a stripe
    of 9 rows per 250 us symbol. ``full_scale`` is the intensity mapped to
    gray 1.0; 1.5 is the brightest symbol mean for unit LED intensities.
    """

    rows: int = 1080
    t_row: float = 250e-6 / 9
    t_exp: float = 250e-6
    led_tau: float = 0.0
    envelope_coeffs: tuple = (0.8, 0.8, -0.8)
    noise_sigma: float = 0.0
    drift_ppm: float = 0.0
    jitter_sigma: float = 0.0
    quantize_bits: int = 8
    rng_seed: int = 0
    t_start: float = 0.0
    full_scale: float = 1.5
    column_taper: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "envelope_coeffs",
                           tuple(float(c) for c in np.atleast_1d(self.envelope_coeffs)))
        if self.rows < 1:
            raise InvalidArgument("rows must be >= 1")
        if self.t_row <= 0 or self.t_exp <= 0:
            raise InvalidArgument("t_row and t_exp must be positive")
        if self.noise_sigma < 0 or self.jitter_sigma < 0 or self.led_tau < 0:
            raise InvalidArgument("noise_sigma, jitter_sigma and led_tau must be >= 0")
        if self.quantize_bits < 1:
            raise InvalidArgument("quantize_bits must be >= 1")
        if self.full_scale <= 0:
            raise InvalidArgument("full_scale must be positive")

    @property
    def maxval(self) -> int:
        return (1 << self.quantize_bits) - 1

    def envelope(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.rows) if self.rows > 1 else np.zeros(1)
        return np.polynomial.polynomial.polyval(x, self.envelope_coeffs)

    def with_flat_envelope(self) -> "ChannelConfig":
        return replace(self, envelope_coeffs=(1.0,))


@dataclass
class GrayColumn:
    """One column of per-row gray values (the receiver's 1-D signal)."""

    values: np.ndarray
    normalized: bool = False
    interp_factor: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 1:
            raise InvalidArgument("a column needs at least one value")
        if self.normalized and (self.values.min() < 0 or self.values.max() > 1):
            raise InvalidArgument("normalized column must lie in [0, 1]")

    def __len__(self):
        return int(self.values.size)


@dataclass
class Frame:
    """Quantised grayscale frame, ``pixels[row, column]`` in 0..maxval."""

    pixels: np.ndarray
    maxval: int = 255

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.int64)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise InvalidArgument("frame must be a non-empty 2-D array")

    @property
    def shape(self):
        return self.pixels.shape

    def column(self, index: int) -> GrayColumn:
        return GrayColumn(self.pixels[:, index] / self.maxval)


def led_response(w: Waveform, tau: float) -> Waveform:
    """First-order LED lag, discretised exactly for piecewise-constant input.

    The filter starts settled at the first sample; ``tau == 0`` is identity.
    """
    if tau < 0:
        raise InvalidArgument("tau must be >= 0")
    if tau == 0 or w.samples.size == 0:
        return w
    pole = np.exp(-w.dt / tau)
    b, a = [0.0, 1.0 - pole], [1.0, -pole]
    # y[n] = pole*y[n-1] + (1-pole)*x[n-1], history held at x[0]
    out, _ = lfilter(b, a, w.samples, zi=lfilter_zi(b, a) * w.samples[0])
    return Waveform(np.maximum(out, 0.0), w.dt)


def _row_starts(cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    r = np.arange(cfg.rows, dtype=float)
    starts = cfg.t_start + r * cfg.t_row * (1.0 + cfg.drift_ppm * 1e-6)
    if cfg.jitter_sigma > 0:
        starts = starts + rng.normal(0.0, cfg.jitter_sigma, cfg.rows)
    return starts


def _exposure_means(w: Waveform, cfg: ChannelConfig, starts: np.ndarray) -> np.ndarray:
    lit = led_response(w, cfg.led_tau)
    # exact window integrals of a piecewise-constant signal via its running integral
    knots = np.arange(lit.samples.size + 1) * lit.dt
    integral = np.concatenate([[0.0], np.cumsum(lit.samples) * lit.dt])
    lo = np.clip(starts, 0.0, w.duration)
    hi = np.clip(starts + cfg.t_exp, 0.0, w.duration)
    return (np.interp(hi, knots, integral) - np.interp(lo, knots, integral)) / cfg.t_exp


def _check_duration(w: Waveform, cfg: ChannelConfig) -> None:
    last = cfg.t_start + (cfg.rows - 1) * cfg.t_row * (1.0 + cfg.drift_ppm * 1e-6) + cfg.t_exp
    if cfg.t_start < 0 or w.duration + 1e-12 < last:
        raise InvalidArgument(
            f"waveform lasts {w.duration:.6g}s but the capture needs [{cfg.t_start:.6g}, {last:.6g}]s")


def _quantize(v: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    return np.rint(np.clip(v, 0.0, 1.0) * cfg.maxval).astype(np.int64)


def _capture_levels(w, cfg, width):
    _check_duration(w, cfg)
    rng = np.random.default_rng(cfg.rng_seed)
    starts = _row_starts(cfg, rng)
    clean = cfg.envelope() * _exposure_means(w, cfg, starts) / cfg.full_scale
    taper = column_taper(width, cfg.column_taper)
    levels = clean[:, None] * taper[None, :]
    if cfg.noise_sigma > 0:
        # column-major draw so that column 0 matches a single-column capture
        noise = rng.normal(0.0, cfg.noise_sigma, (width, cfg.rows)).T
        levels = levels + noise
    return _quantize(levels, cfg)


def column_taper(width: int, depth: float) -> np.ndarray:
    """Flat over the middle half of the frame, quadratic fall-off to ``1 - depth``."""
    if width < 1:
        raise InvalidArgument("width must be >= 1")
    if width == 1:
        return np.ones(1)
    u = np.abs(np.linspace(-1.0, 1.0, width))
    return 1.0 - depth * (np.maximum(u - 0.5, 0.0) / 0.5) ** 2


def rolling_shutter_capture(w: Waveform, cfg: ChannelConfig) -> GrayColumn:
    q = _capture_levels(w, cfg, 1)[:, 0]
    return GrayColumn(q / cfg.maxval)


def make_frame(w: Waveform, cfg: ChannelConfig, width: int) -> Frame:
    """Render ``width`` columns sharing row timing but with independent noise."""
    return Frame(_capture_levels(w, cfg, width), cfg.maxval)


# -- file formats ---------------------------------------------------------------

def write_frame(path, frame: Frame) -> None:
    """Plain-text matrix: ``R C maxval`` then R lines of C integers."""
    r, c = frame.shape
    lines = [f"{r} {c} {frame.maxval}"]
    lines += [" ".join(str(int(v)) for v in row) for row in frame.pixels]
    Path(path).write_text("\n".join(lines) + "\n")


def read_frame(path) -> Frame:
    tokens = Path(path).read_text().split()
    if len(tokens) < 3:
        raise InvalidArgument(f"{path}: missing frame header")
    r, c, maxval = (int(t) for t in tokens[:3])
    data = np.array([int(t) for t in tokens[3:]], dtype=np.int64)
    if data.size != r * c:
        raise InvalidArgument(f"{path}: expected {r * c} pixels, found {data.size}")
    return Frame(data.reshape(r, c), maxval)


def write_column(path, col: GrayColumn) -> None:
    Path(path).write_text("".join(f"{v!r}\n" for v in col.values.tolist()))


def read_column(path, normalized: bool = False) -> GrayColumn:
    vals = [float(ln) for ln in Path(path).read_text().split()]
    return GrayColumn(np.array(vals), normalized=normalized)

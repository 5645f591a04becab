"""
Dual-LED hybrid NRZ-OOK / RZ-OOK transmitter.

LED1 carries an NRZ stream ``a`` and LED2 an RZ stream ``b``; the diffused sum
of the two is a 4-level signal whose per-symbol mean encodes ``2*a + b``.

    spec = PacketSpec(payload_len_bits=70)
    stream = build_packet(payload_a, payload_b, spec)
    wave = synthesize_waveform(stream, dt=spec.symbol_period / 16)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from rsocc.errors import DegenerateLevels, InvalidArgument

DEFAULT_HEADER = (1, 0, 1, 0, 1, 0, 1, 0, 1, 0)


def _as_bits(bits, name="bits") -> np.ndarray:
    arr = np.asarray(bits, dtype=np.int64).ravel()
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise InvalidArgument(f"{name} must contain only 0/1")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class PacketSpec:
    """Packet framing shared by transmitter and receiver.

    Attributes:
        header_bits: synchronisation header, sent identically on both LEDs.
        payload_len_bits: payload bits per LED stream.
        repetitions: back-to-back copies of each packet.
        symbol_period: seconds per symbol (one NRZ bit + one RZ bit).
    """

    header_bits: tuple = DEFAULT_HEADER
    payload_len_bits: int = 70
    repetitions: int = 3
    symbol_period: float = 250e-6

    def __post_init__(self):
        header = tuple(int(b) for b in self.header_bits)
        object.__setattr__(self, "header_bits", header)
        if len(header) < 2:
            raise InvalidArgument("header needs at least 2 bits")
        if header[0] != 1 or any(header[i] == header[i + 1] for i in range(len(header) - 1)):
            raise InvalidArgument("header must alternate 1,0,1,0,...")
        if self.repetitions < 1:
            raise InvalidArgument("repetitions must be >= 1")
        if self.payload_len_bits < 0:
            raise InvalidArgument("payload_len_bits must be >= 0")
        if self.symbol_period <= 0:
            raise InvalidArgument("symbol_period must be positive")

    @property
    def header_len(self) -> int:
        return len(self.header_bits)

    @property
    def packet_len(self) -> int:
        """Symbols per packet copy (header + payload)."""
        return self.header_len + self.payload_len_bits

    def header_symbols(self, M: int = 4) -> np.ndarray:
        """Header in symbol space: (M-1), 0, (M-1), 0, ..."""
        return np.asarray(self.header_bits, dtype=np.int64) * (M - 1)


@dataclass(frozen=True)
class DualBitstream:
    bits_a: np.ndarray
    bits_b: np.ndarray
    spec: PacketSpec = field(default_factory=PacketSpec)

    def __post_init__(self):
        a = _as_bits(self.bits_a, "bits_a")
        b = _as_bits(self.bits_b, "bits_b")
        if a.size != b.size:
            raise InvalidArgument(f"stream lengths differ: {a.size} != {b.size}")
        object.__setattr__(self, "bits_a", a)
        object.__setattr__(self, "bits_b", b)

    def __len__(self):
        return int(self.bits_a.size)


@dataclass(frozen=True)
class Waveform:
    """Piecewise-constant optical intensity, one value per ``dt`` seconds."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if self.dt <= 0:
            raise InvalidArgument("dt must be positive")
        if s.size and s.min() < 0:
            raise InvalidArgument("intensity must be non-negative")
        object.__setattr__(self, "samples", s)

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt


@dataclass(frozen=True)
class LevelTable:
    """Ideal normalised symbol means, indexed by symbol value.

    ``raw`` keeps the un-normalised means (intensity units).
    """

    M: int
    levels: np.ndarray
    raw: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.size != self.M or np.any(np.diff(lv) <= 0) or lv[0] != 0 or lv[-1] != 1:
            raise DegenerateLevels(f"levels must increase strictly from 0 to 1: {lv}")
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "raw", np.asarray(self.raw, dtype=float))


def build_packet(payload_a: Sequence[int], payload_b: Sequence[int],
                 spec: PacketSpec) -> DualBitstream:
    """Frame both payloads as ``repetitions`` copies of header + payload."""
    a = _as_bits(payload_a, "payload_a")
    b = _as_bits(payload_b, "payload_b")
    if a.size != spec.payload_len_bits or b.size != spec.payload_len_bits:
        raise InvalidArgument(
            f"payloads must have {spec.payload_len_bits} bits, got {a.size} and {b.size}")
    header = np.asarray(spec.header_bits, dtype=np.uint8)
    bits_a = np.tile(np.concatenate([header, a]), spec.repetitions)
    bits_b = np.tile(np.concatenate([header, b]), spec.repetitions)
    return DualBitstream(bits_a, bits_b, spec)


def symbols_of(stream: DualBitstream, M: int = 4) -> np.ndarray:
    if M != 4:
        raise InvalidArgument("the dual-LED transmitter is 4-ary only")
    return 2 * stream.bits_a.astype(np.int64) + stream.bits_b.astype(np.int64)


def bits_of(symbols) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`symbols_of`: split 4-ary symbols into (a, b) bits."""
    s = np.asarray(symbols, dtype=np.int64)
    return (s // 2).astype(np.uint8), (s % 2).astype(np.uint8)


def synthesize_waveform(stream: DualBitstream, dt: float, i1: float = 1.0,
                        i2: float = 1.0) -> Waveform:
    """Sum of the NRZ LED1 and RZ LED2 intensities.

    Within symbol n the first half-period carries ``a_n*i1 + b_n*i2`` and the
    second half ``a_n*i1``: the RZ pulse has 50% duty and leads the period.
    """
    if i1 <= 0 or i2 <= 0:
        raise InvalidArgument("LED intensities must be positive")
    half = stream.spec.symbol_period / 2
    n_half = int(round(half / dt))
    if n_half < 1 or abs(n_half * dt - half) > 1e-9 * half:
        raise InvalidArgument(f"dt={dt} does not divide T/2={half}")
    a = stream.bits_a.astype(float)
    b = stream.bits_b.astype(float)
    halves = np.empty(2 * a.size)
    halves[0::2] = a * i1 + b * i2
    halves[1::2] = a * i1
    return Waveform(np.repeat(halves, n_half), dt)


def ideal_levels(M: int = 4, i1: float = 1.0, i2: float = 1.0, duty: float = 0.5) -> LevelTable:
    if M != 4:
        raise InvalidArgument("the dual-LED transmitter is 4-ary only")
    if not 0 < duty < 1:
        raise InvalidArgument("duty must lie in (0, 1)")
    raw = np.array([0.0, duty * i2, i1, i1 + duty * i2])
    if np.any(np.diff(raw) <= 0):
        raise DegenerateLevels(f"symbol means not strictly increasing: {raw}")
    return LevelTable(M, raw / raw[-1], raw)


# -- plain-text serialisation ------------------------------------------------

def write_bits(path, bits) -> None:
    """One bit per line."""
    arr = _as_bits(bits)
    Path(path).write_text("".join(f"{int(b)}\n" for b in arr))


def read_bits(path) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    return _as_bits([int(ln) for ln in lines if ln], str(path))


def write_levels(path, table: LevelTable) -> None:
    rows = ["symbol,level,raw_mean"]
    rows += [f"{s},{float(lv)!r},{float(r)!r}" for s, (lv, r) in enumerate(zip(table.levels, table.raw))]
    Path(path).write_text("\n".join(rows) + "\n")


def read_levels(path) -> LevelTable:
    lines = Path(path).read_text().splitlines()[1:]
    vals = [ln.split(",") for ln in lines if ln.strip()]
    levels = [float(v[1]) for v in vals]
    raw = [float(v[2]) for v in vals]
    return LevelTable(len(levels), levels, raw)

"""
End-to-end link: encode, render through the camera, decode with ASM or CR,
and score against the transmitted payload.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from rsocc.camera import ChannelConfig, Frame, GrayColumn, make_frame
from rsocc.errors import ConfigError, HeaderNotFound, IncompletePacket, InvalidArgument, OCCError
from rsocc.modulation import (
    DualBitstream,
    PacketSpec,
    Waveform,
    bits_of,
    build_packet,
    symbols_of,
    synthesize_waveform,
)
from rsocc.preprocess import (
    equalize_histogram,
    estimate_stripe_width,
    noise_sigma,
    normalize,
    resample_to_odd_width,
    select_column,
)
from rsocc.prt import classify_rows, prt_thresholds
from rsocc.sampler import ASM, CR, SamplePlan, asm_sample, cr_sample

log = logging.getLogger(__name__)

METHODS = (ASM, CR)
PIPELINE_ORDER = "normalize>equalize>estimate>resample>prt>sample>classify>locate>reconstruct"


@dataclass(frozen=True)
class ReceiverConfig:
    M: int = 4
    bins: int = 256
    equalize: bool = False
    N: int = 128
    min_prominence: float = 0.1
    plateau: str = "right"
    sharpness_factor: float = 4.0
    level: float = 0.5
    frame_rate: float = 60.0
    vote: bool = True
    max_header_errors: float = 0.2


@dataclass
class DecodeReport:
    method: str
    ok: bool
    header_index: int = -1
    symbols: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    payload_bits_a: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    payload_bits_b: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    ber: float = float("nan")
    ber_single: float = float("nan")
    symbol_error_rate: float = float("nan")
    throughput_bps: float = 0.0
    error: str = ""
    plan: Optional[SamplePlan] = None
    config_echo: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "method": self.method,
            "ok": int(self.ok),
            "header_index": self.header_index,
            "ber": self.ber,
            "ber_single": self.ber_single,
            "symbol_error_rate": self.symbol_error_rate,
            "throughput_bps": self.throughput_bps,
            "error": self.error,
        }

    def to_text(self) -> str:
        lines = [f"{k}={v}" for k, v in self.summary().items()]
        lines.append("symbols=" + "".join(str(int(s)) for s in self.symbols))
        lines.append("payload_a=" + "".join(str(int(b)) for b in self.payload_bits_a))
        lines.append("payload_b=" + "".join(str(int(b)) for b in self.payload_bits_b))
        lines += [f"config.{k}={v}" for k, v in sorted(self.config_echo.items())]
        return "\n".join(lines) + "\n"


# -- packet level -------------------------------------------------------------

def locate_header(symbols, spec: PacketSpec, M: int = 4, max_errors: float = 0.2) -> int:
    """Earliest index where the symbol header matches with fewest mismatches."""
    s = np.asarray(symbols, dtype=np.int64)
    h = spec.header_symbols(M)
    if s.size < h.size:
        raise HeaderNotFound("symbol stream shorter than the header")
    windows = np.lib.stride_tricks.sliding_window_view(s, h.size)
    dist = np.count_nonzero(windows != h, axis=1)
    best = int(np.argmin(dist))
    if dist[best] > max_errors * h.size:
        raise HeaderNotFound(f"best header match has {dist[best]} mismatches")
    return best


def reconstruct_packet(symbols, header_index: int, spec: PacketSpec,
                       vote: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Payload bits after the header, majority-voted across visible copies.

    Copies are expected every ``packet_len`` symbols on either side of the
    located header. A position's vote uses every copy that covers it; ties
    fall back to the earliest complete copy.
    """
    s = np.asarray(symbols, dtype=np.int64)
    L, H, P = spec.packet_len, spec.header_len, spec.payload_len_bits
    span = spec.repetitions - 1
    starts = [header_index + H + j * L for j in range(-span, span + 1)]
    complete = [st for st in starts if st >= 0 and st + P <= s.size]
    if not complete:
        raise IncompletePacket("no complete payload copy in view")
    primary = header_index + H if header_index + H + P <= s.size else complete[0]
    payload = s[primary:primary + P].copy()
    if vote and spec.repetitions > 1:
        for p in range(P):
            votes = [s[st + p] for st in starts if 0 <= st + p < s.size]
            vals, counts = np.unique(votes, return_counts=True)
            top = vals[counts == counts.max()]
            if top.size == 1:
                payload[p] = top[0]
    return bits_of(payload)


def bit_error_rate(tx, rx) -> float:
    tx = np.asarray(tx)
    rx = np.asarray(rx)
    if tx.shape != rx.shape:
        raise InvalidArgument(f"length mismatch: {tx.size} vs {rx.size}")
    if tx.size == 0:
        return 0.0
    return float(np.count_nonzero(tx != rx)) / tx.size


def throughput(spec: PacketSpec, frame_rate: float) -> float:
    """Bits per second when every frame yields one payload on both LEDs."""
    return frame_rate * 2 * spec.payload_len_bits


# -- link simulation ----------------------------------------------------------

# LED2 slightly dimmer than LED1 keeps every extremum of the captured column on
# a symbol boundary (see find_local_extrema's plateau rule).
LINK_I1 = 1.0
LINK_I2 = 0.8


def peak_intensity(i1: float = LINK_I1, i2: float = LINK_I2) -> float:
    """Brightest symbol mean, used as the camera's full scale."""
    return i1 + 0.5 * i2


def transmit_waveform(stream: DualBitstream, duration: float, oversample: int = 16,
                      i1: float = LINK_I1, i2: float = LINK_I2) -> Waveform:
    """Waveform of ``stream`` repeated back-to-back for at least ``duration``."""
    T = stream.spec.symbol_period
    n_sym = len(stream)
    cycles = max(1, int(np.ceil(duration / (n_sym * T))) + 1)
    looped = DualBitstream(np.tile(stream.bits_a, cycles), np.tile(stream.bits_b, cycles),
                           stream.spec)
    return synthesize_waveform(looped, T / oversample, i1, i2)


def capture_span(cfg: ChannelConfig) -> float:
    return cfg.t_start + cfg.rows * cfg.t_row * (1 + cfg.drift_ppm * 1e-6) + cfg.t_exp \
        + 10 * cfg.jitter_sigma


def simulate_frame(stream: DualBitstream, cfg: ChannelConfig, width: int = 1,
                   lead_symbols: float = 4.0, i1: float = LINK_I1, i2: float = LINK_I2) -> Frame:
    """Render ``stream`` so capture opens ``lead_symbols`` before a header.

    The capture is aimed at the second packet copy (or the first if only
    one is sent), mimicking a camera that wakes mid-transmission.
    """
    spec = stream.spec
    copy = 1 if spec.repetitions > 1 else 0
    t_start = (copy * spec.packet_len - lead_symbols) * spec.symbol_period
    if t_start < 0:
        t_start += len(stream) * spec.symbol_period
    cfg = replace(cfg, t_start=t_start)
    w = transmit_waveform(stream, capture_span(cfg), i1=i1, i2=i2)
    return make_frame(w, cfg, width)


def _sample(col: GrayColumn, spec: PacketSpec, rx: ReceiverConfig, method: str):
    est = estimate_stripe_width(col, spec, level=rx.level)
    if method == ASM:
        col_r = resample_to_odd_width(col, est)
        ts = prt_thresholds(col_r, rx.M)
        sharp = rx.sharpness_factor * noise_sigma(col)
        plan = asm_sample(col_r, est.X, rx.N, rx.min_prominence, rx.plateau, sharp)
    elif method == CR:
        ts = prt_thresholds(col, rx.M)
        plan = cr_sample(col, est)
    else:
        raise ConfigError(f"unknown method {method!r}")
    symbols = classify_rows(plan.values, plan.source_rows, ts)
    return plan, symbols


def decode_column(col: GrayColumn, spec: PacketSpec, rx: ReceiverConfig = ReceiverConfig(),
                  method: str = ASM, tx_a=None, tx_b=None) -> DecodeReport:
    """Run the receiver chain on one column; failures are recorded, not raised."""
    echo = {f"rx.{k}": v for k, v in asdict(rx).items()}
    echo["order"] = PIPELINE_ORDER
    report = DecodeReport(method=method, ok=False, config_echo=echo)
    try:
        work = normalize(col)
        if rx.equalize:
            work = equalize_histogram(work, rx.bins)
        plan, symbols = _sample(work, spec, rx, method)
        report.plan, report.symbols = plan, symbols
        report.header_index = locate_header(symbols, spec, rx.M, rx.max_header_errors)
        a, b = reconstruct_packet(symbols, report.header_index, spec, rx.vote)
        report.payload_bits_a, report.payload_bits_b = a, b
        report.ok = True
        report.throughput_bps = throughput(spec, rx.frame_rate)
    except OCCError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        log.debug("decode failed: %s", report.error)

    if tx_a is not None and tx_b is not None:
        tx_a = np.asarray(tx_a, dtype=np.uint8)
        tx_b = np.asarray(tx_b, dtype=np.uint8)
        if report.ok:
            tx = np.concatenate([tx_a, tx_b])
            report.ber = bit_error_rate(tx, np.concatenate([report.payload_bits_a,
                                                            report.payload_bits_b]))
            tx_sym = 2 * tx_a.astype(np.int64) + tx_b
            rx_sym = 2 * report.payload_bits_a.astype(np.int64) + report.payload_bits_b
            report.symbol_error_rate = float(np.mean(tx_sym != rx_sym)) if tx_sym.size else 0.0
            try:
                sa, sb = reconstruct_packet(report.symbols, report.header_index, spec, vote=False)
                report.ber_single = bit_error_rate(tx, np.concatenate([sa, sb]))
            except IncompletePacket:
                pass
        else:
            # a lost frame counts as all bits wrong
            report.ber = report.ber_single = report.symbol_error_rate = 1.0
    return report


def decode_frame(frame: Frame, spec: PacketSpec, rx: ReceiverConfig = ReceiverConfig(),
                 method: str = ASM, tx_a=None, tx_b=None) -> DecodeReport:
    return decode_column(select_column(frame), spec, rx, method, tx_a, tx_b)


# -- experiments --------------------------------------------------------------

SWEEP_AXES = ("noise_sigma", "drift_ppm", "jitter_sigma", "stripe_width", "method")


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid of channel impairments swept over independent seeds.

    ``stripe_width`` is rows per symbol; the row period is derived from it
    and the symbol period. Every axis takes a tuple of values.
    """

    noise_sigma: tuple = (0.0,)
    drift_ppm: tuple = (0.0,)
    jitter_sigma: tuple = (0.0,)
    stripe_width: tuple = (9.0,)
    method: tuple = (ASM, CR)
    seeds: int = 1
    base_seed: int = 0
    payload_len_bits: int = 70
    repetitions: int = 3
    symbol_period: float = 250e-6
    rows: int = 1080
    width: int = 1
    t_exp: float = 250e-6
    led_tau: float = 0.0
    envelope_coeffs: tuple = (0.8, 0.8, -0.8)
    quantize_bits: int = 8
    i1: float = LINK_I1
    i2: float = LINK_I2
    frame_rate: float = 60.0
    equalize: bool = False
    N: int = 128
    min_prominence: float = 0.1
    plateau: str = "right"
    sharpness_factor: float = 4.0

    def __post_init__(self):
        for m in self.method:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")

    def grid(self):
        axes = [getattr(self, a) for a in SWEEP_AXES]
        return list(itertools.product(*axes))


@dataclass
class RunRecord:
    index: int
    seed: int
    point: dict
    report: DecodeReport


def run_point(cfg: ExperimentConfig, point: dict, seed: int) -> dict:
    """Encode random payloads, render once, decode with every requested method."""
    rng = np.random.default_rng(seed)
    spec = PacketSpec(payload_len_bits=cfg.payload_len_bits, repetitions=cfg.repetitions,
                      symbol_period=cfg.symbol_period)
    pa = rng.integers(0, 2, spec.payload_len_bits)
    pb = rng.integers(0, 2, spec.payload_len_bits)
    stream = build_packet(pa, pb, spec)
    W = float(point["stripe_width"])
    visible = cfg.rows / W
    lead = rng.uniform(2.0, max(2.0, visible - spec.packet_len - 2.0))
    ch = ChannelConfig(
        rows=cfg.rows, t_row=cfg.symbol_period / W, t_exp=cfg.t_exp, led_tau=cfg.led_tau,
        envelope_coeffs=cfg.envelope_coeffs, noise_sigma=float(point["noise_sigma"]),
        drift_ppm=float(point["drift_ppm"]), jitter_sigma=float(point["jitter_sigma"]),
        quantize_bits=cfg.quantize_bits, rng_seed=int(rng.integers(2**31)),
        full_scale=peak_intensity(cfg.i1, cfg.i2))
    frame = simulate_frame(stream, ch, cfg.width, lead, cfg.i1, cfg.i2)
    rx = ReceiverConfig(frame_rate=cfg.frame_rate, equalize=cfg.equalize, N=cfg.N,
                        min_prominence=cfg.min_prominence, plateau=cfg.plateau,
                        sharpness_factor=cfg.sharpness_factor)
    return {"spec": spec, "frame": frame, "rx": rx, "pa": pa, "pb": pb}


def run_experiment(cfg: ExperimentConfig) -> tuple[list[RunRecord], str]:
    """Run the full grid; returns per-run records and the aggregate CSV text.

    The same rendered frame is decoded by each method so that methods are
    compared on identical captures. Rows are ordered by grid index then seed.
    """
    records = []
    channel_axes = [a for a in SWEEP_AXES if a != "method"]
    channel_grid = list(itertools.product(*[getattr(cfg, a) for a in channel_axes]))
    idx = 0
    for gi, values in enumerate(channel_grid):
        point = dict(zip(channel_axes, values))
        for s in range(cfg.seeds):
            seed = cfg.base_seed + 1000003 * gi + s
            try:
                link = run_point(cfg, point, seed)
            except OCCError as exc:
                for m in cfg.method:
                    rep = DecodeReport(method=m, ok=False, error=f"{type(exc).__name__}: {exc}",
                                       ber=1.0, ber_single=1.0, symbol_error_rate=1.0)
                    records.append(RunRecord(idx, seed, {**point, "method": m}, rep))
                    idx += 1
                continue
            for m in cfg.method:
                rep = decode_frame(link["frame"], link["spec"], link["rx"], m,
                                   link["pa"], link["pb"])
                rep.config_echo.update({f"ch.{k}": v for k, v in point.items()})
                rep.config_echo["seed"] = seed
                records.append(RunRecord(idx, seed, {**point, "method": m}, rep))
                idx += 1
    return records, aggregate_csv(records)


def aggregate_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    cols = ["run", "seed", *SWEEP_AXES, "ok", "header_index", "ber", "ber_single",
            "symbol_error_rate", "throughput_bps", "error"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in records:
        s = r.report.summary()
        writer.writerow([r.index, r.seed, *(r.point[a] for a in SWEEP_AXES),
                         s["ok"], s["header_index"], repr(s["ber"]), repr(s["ber_single"]),
                         repr(s["symbol_error_rate"]), repr(s["throughput_bps"]), s["error"]])
    return buf.getvalue()


def mean_ber(records: list[RunRecord], **where) -> float:
    sel = [r.report.ber for r in records if all(r.point[k] == v for k, v in where.items())]
    return float(np.mean(sel)) if sel else float("nan")


def experiment_fields() -> dict:
    return {f.name: f for f in fields(ExperimentConfig)}

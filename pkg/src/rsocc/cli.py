"""
Command-line front end.

    rsocc encode payload.txt streams/
    rsocc simulate streams/stream_a.txt streams/stream_b.txt frame.txt --noise-sigma 0.02
    rsocc decode frame.txt --method CR --payload payload.txt
    rsocc evaluate --config sweep.conf --out-dir results/

Every key of a ``key=value`` config file can also be given as ``--key-name``;
flags win over the file. Exit codes: 0 success, 2 configuration or input
error, 3 decode failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from rsocc import config as C
from rsocc.camera import ChannelConfig, read_frame, write_frame
from rsocc.errors import ConfigError, OCCError
from rsocc.harness import (
    METHODS,
    ExperimentConfig,
    ReceiverConfig,
    decode_frame,
    peak_intensity,
    run_experiment,
    simulate_frame,
)
from rsocc.modulation import DualBitstream, PacketSpec, build_packet, read_bits, write_bits

EXIT_OK, EXIT_CONFIG, EXIT_DECODE = 0, 2, 3

LINK_KEYS = {"width": 1, "lead_symbols": 4.0, "i1": 1.0, "i2": 0.8}
DECODE_KEYS = {"method": METHODS[0]}

log = logging.getLogger("rsocc")


def _keys(*classes, extra=None) -> dict:
    out = {}
    for cls in classes:
        out.update(C.field_defaults(cls))
    out.update(extra or {})
    return out


def _add_key_flags(p: argparse.ArgumentParser, keys: dict) -> None:
    group = p.add_argument_group("config keys (override --config)")
    for k in sorted(keys):
        group.add_argument("--" + k.replace("_", "-"), dest="key_" + k, metavar="VALUE",
                           default=None)


def _settings(args, keys: dict) -> dict:
    values = C.read_config(args.config) if args.config else {}
    unknown = sorted(set(values) - set(keys))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    for k in keys:
        v = getattr(args, "key_" + k)
        if v is not None:
            values[k] = v
    return values


def _split(values: dict, cls) -> tuple[object, dict]:
    names = set(C.field_defaults(cls))
    obj, _ = C.build(cls, {k: v for k, v in values.items() if k in names})
    return obj, {k: v for k, v in values.items() if k not in names}


def _extras(values: dict, defaults: dict) -> dict:
    return {k: C.coerce(values.get(k, d), d, k) for k, d in defaults.items()}


# -- subcommands ------------------------------------------------------------------

def cmd_encode(args) -> int:
    spec, _ = _split(_settings(args, args.keys), PacketSpec)
    bits = read_bits(args.payload)
    L = spec.payload_len_bits
    if bits.size != 2 * L:
        raise ConfigError(f"payload file needs {2 * L} bits (LED1 then LED2), found {bits.size}")
    stream = build_packet(bits[:L], bits[L:], spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_bits(out / "stream_a.txt", stream.bits_a)
    write_bits(out / "stream_b.txt", stream.bits_b)
    print(f"wrote {len(stream)} symbols to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    values = _settings(args, args.keys)
    spec, rest = _split(values, PacketSpec)
    link = _extras(rest, LINK_KEYS)
    rest = {k: v for k, v in rest.items() if k not in LINK_KEYS}
    rest.setdefault("full_scale", repr(peak_intensity(link["i1"], link["i2"])))
    ch, _ = C.build(ChannelConfig, rest)
    stream = DualBitstream(read_bits(args.stream_a), read_bits(args.stream_b), spec)
    frame = simulate_frame(stream, ch, int(link["width"]), float(link["lead_symbols"]),
                           link["i1"], link["i2"])
    write_frame(args.out, frame)
    print(f"wrote {frame.shape[0]}x{frame.shape[1]} frame to {args.out}")
    return EXIT_OK


def cmd_decode(args) -> int:
    values = _settings(args, args.keys)
    spec, rest = _split(values, PacketSpec)
    method = _extras(rest, DECODE_KEYS)["method"]
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")
    rx, _ = C.build(ReceiverConfig, {k: v for k, v in rest.items() if k not in DECODE_KEYS})
    tx_a = tx_b = None
    if args.payload:
        bits = read_bits(args.payload)
        L = spec.payload_len_bits
        if bits.size != 2 * L:
            raise ConfigError(f"payload file needs {2 * L} bits, found {bits.size}")
        tx_a, tx_b = bits[:L], bits[L:]
    report = decode_frame(read_frame(args.frame), spec, rx, method, tx_a, tx_b)
    report.config_echo.update({f"spec.{k}": v for k, v in asdict(spec).items()})
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if not report.ok:
        log.error("decode failed: %s", report.error)
        return EXIT_DECODE
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg, _ = C.build(ExperimentConfig, _settings(args, args.keys))
    records, csv_text = run_experiment(cfg)
    out = Path(args.out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    (out / "aggregate.csv").write_text(csv_text)
    for r in records:
        (out / "runs" / f"run_{r.index:05d}.txt").write_text(r.report.to_text())
    bers = [r.report.ber for r in records]
    print(f"{len(records)} runs, mean ber {np.mean(bers):.4g}; wrote {out / 'aggregate.csv'}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsocc", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, keys, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value file")
        p.set_defaults(func=func, keys=keys)
        return p

    p = command("encode", cmd_encode, _keys(PacketSpec), "payload bits -> LED bitstreams")
    p.add_argument("payload", help="2*payload_len_bits bits, one per line (LED1 then LED2)")
    p.add_argument("out_dir")

    p = command("simulate", cmd_simulate, _keys(PacketSpec, ChannelConfig, extra=LINK_KEYS),
                "bitstreams -> rolling-shutter frame")
    p.add_argument("stream_a")
    p.add_argument("stream_b")
    p.add_argument("out")

    p = command("decode", cmd_decode, _keys(PacketSpec, ReceiverConfig, extra=DECODE_KEYS),
                "frame -> decode report")
    p.add_argument("frame")
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--payload", help="transmitted payload bits, for BER scoring")

    p = command("evaluate", cmd_evaluate, _keys(ExperimentConfig), "run a sweep")
    p.add_argument("--out-dir", required=True)

    for p in sub.choices.values():
        _add_key_flags(p, p.get_default("keys"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (OCCError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

import numpy as np
import pytest

from rsocc.camera import ChannelConfig
from rsocc.harness import LINK_I1, LINK_I2, peak_intensity, simulate_frame
from rsocc.modulation import PacketSpec, build_packet, symbols_of
from rsocc.preprocess import normalize, select_column

T = 250e-6

# criterion number -> verdict line, filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])


def flat_channel(W=9.0, **kw) -> ChannelConfig:
    base = dict(t_row=T / W, envelope_coeffs=(1.0,), full_scale=peak_intensity())
    base.update(kw)
    return ChannelConfig(**base)


def random_link(seed, W=9.0, lead=20.0, **channel):
    """Random packet rendered through a flat channel; returns (payloads, stream, column)."""
    rng = np.random.default_rng(seed)
    spec = PacketSpec()
    pa = rng.integers(0, 2, spec.payload_len_bits)
    pb = rng.integers(0, 2, spec.payload_len_bits)
    stream = build_packet(pa, pb, spec)
    frame = simulate_frame(stream, flat_channel(W, **channel), 1, lead, LINK_I1, LINK_I2)
    return (pa, pb), stream, normalize(select_column(frame))


def true_symbols(stream, lead, count):
    """Transmitted symbols starting at the capture's first full symbol."""
    s = symbols_of(stream)
    first = stream.spec.packet_len - int(np.ceil(lead))
    loops = np.tile(s, 3)
    return loops[first:first + count]


def balanced_column(seed, W=9, blocks=30, envelope_ratio=1.0, sigma=0.0):
    """Stripes at levels {0, 1/3, 2/3, 1}, every symbol equally often.

    Returns (per-row truth, column). The envelope peaks at 1 mid-column and
    falls to ``1 / envelope_ratio`` at both ends.
    """
    rng = np.random.default_rng(seed)
    sym = np.concatenate([rng.permutation(4) for _ in range(blocks)])
    truth = np.repeat(sym, W)
    x = np.linspace(0, 1, truth.size)
    # cubic: edges at exactly 1/ratio, slightly skewed hump near 1
    env = 1 / envelope_ratio + (1 - 1 / envelope_ratio) * 4 * x * (1 - x) * (1 + 0.2 * (x - 0.5))
    return truth, truth / 3 * env + rng.normal(0, sigma, truth.size) * (sigma > 0)


@pytest.fixture
def spec():
    return PacketSpec()

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rsocc.camera import GrayColumn
from rsocc.errors import InsufficientExtrema
from rsocc.harness import locate_header, reconstruct_packet
from rsocc.modulation import PacketSpec, bits_of, build_packet, symbols_of
from rsocc.preprocess import equalize_histogram, normalize, odd_width
from rsocc.prt import classify_rows, prt_thresholds, reflect_high, reflect_low
from rsocc.sampler import asm_sample, best_multiple, segment_rescale

settings.register_profile("rsocc", deadline=None, max_examples=60)
settings.load_profile("rsocc")

unit = st.floats(0.0, 1.0, allow_nan=False)
bits = st.lists(st.integers(0, 1), min_size=1, max_size=40)


def columns(min_size=8, max_size=300):
    return arrays(np.float64, st.integers(min_size, max_size), elements=unit)


@given(bits, st.data(), st.integers(1, 4))
def test_symbol_bit_roundtrip(a, data, reps):
    b = data.draw(st.lists(st.integers(0, 1), min_size=len(a), max_size=len(a)))
    spec = PacketSpec(payload_len_bits=len(a), repetitions=reps)
    stream = build_packet(a, b, spec)
    assert len(stream) == reps * spec.packet_len
    ra, rb = bits_of(symbols_of(stream))
    assert np.array_equal(ra, stream.bits_a) and np.array_equal(rb, stream.bits_b)


@given(bits, st.data())
def test_packet_decodes_from_own_symbols(a, data):
    b = data.draw(st.lists(st.integers(0, 1), min_size=len(a), max_size=len(a)))
    spec = PacketSpec(payload_len_bits=len(a))
    s = symbols_of(build_packet(a, b, spec))
    ra, rb = reconstruct_packet(s, 0, spec)
    assert ra.tolist() == a and rb.tolist() == b


@given(st.integers(0, 60), st.integers(0, 60), st.data())
def test_locate_header_finds_any_offset(q, tail, data):
    spec = PacketSpec()
    noise = st.lists(st.integers(1, 2), min_size=q + tail, max_size=q + tail)
    fill = data.draw(noise)
    s = np.array(fill[:q] + [3, 0] * 5 + fill[q:])
    assert locate_header(s, spec) == q


@given(columns(), columns())
def test_reflection_preserves_distance_and_side(p, th):
    n = min(p.size, th.size)
    p, th = p[:n], th[:n]
    lo, hi = reflect_low(p, th), reflect_high(p, th)
    assert np.all(lo >= th - 1e-12) and np.all(hi <= th + 1e-12)
    np.testing.assert_allclose(np.abs(lo - th), np.abs(p - th), atol=1e-12)
    np.testing.assert_allclose(np.abs(hi - th), np.abs(p - th), atol=1e-12)


@given(columns(), st.sampled_from([4, 6, 8, 10]))
def test_thresholds_are_ordered(p, M):
    ts = prt_thresholds(p, M)
    assert ts.curves.shape == (M - 1, p.size)
    assert np.all(np.diff(ts.curves, axis=0) >= 0)


@given(columns())
def test_binary_curve_is_quaternary_mid(p):
    np.testing.assert_allclose(prt_thresholds(p, 2).curves[0], prt_thresholds(p, 4).curves[1],
                               atol=1e-12)


@given(columns(), st.floats(0.1, 10.0), st.floats(-5.0, 5.0))
def test_thresholds_affine_covariant(p, a, b):
    base = prt_thresholds(p, 4).curves
    moved = prt_thresholds(a * p + b, 4).curves
    np.testing.assert_allclose(moved, a * base + b, atol=1e-7 * (1 + a + abs(b)))


@given(columns())
def test_classification_monotone_in_value(p):
    ts = prt_thresholds(p, 4)
    rows = np.arange(p.size)
    low, high = classify_rows(p, rows, ts), classify_rows(p + 0.05, rows, ts)
    assert np.all(high >= low) and np.all((0 <= low) & (low <= 3))


@given(columns(min_size=2))
def test_equalization_preserves_rank(v):
    out = equalize_histogram(GrayColumn(v, normalized=True)).values
    order = np.argsort(v, kind="stable")
    assert np.all(np.diff(out[order]) >= 0)
    assert np.all((0 < out) & (out <= 1))


@given(columns(min_size=2))
def test_normalize_idempotent(v):
    assume(np.ptp(v) > 1e-6)
    once = normalize(GrayColumn(v))
    assert once.values.min() == 0.0 and once.values.max() == 1.0
    np.testing.assert_allclose(normalize(once).values, once.values, atol=1e-12)


@given(st.floats(1.0, 40.0))
def test_odd_width_rounds_then_goes_up_to_odd(W):
    X, r = odd_width(W), round(W)
    assert X % 2 == 1 and X >= 3
    assert X == max(r if r % 2 else r + 1, 3)
    assert 0 <= X - r <= 1 or r < 3


@given(st.integers(1, 500), st.sampled_from([3, 5, 7, 9, 11]), st.integers(1, 40))
def test_best_multiple_minimises(delta, X, N):
    k = best_multiple(delta, X, N)
    assert 1 <= k <= N
    assert all((delta - k * X) ** 2 <= (delta - j * X) ** 2 for j in range(1, N + 1))


@given(arrays(np.float64, st.integers(2, 80), elements=unit), st.integers(1, 8),
       st.sampled_from([3, 5, 9]), unit)
def test_rescale_length_and_endpoint(seg, k, X, nxt):
    out = segment_rescale(seg, k, X, nxt)
    assert out.size == k * X and out[-1] == nxt and out[0] == seg[0]


@st.composite
def piecewise_columns(draw):
    gaps = draw(st.lists(st.integers(3, 30), min_size=3, max_size=25))
    knots = np.concatenate([[0], np.cumsum(gaps)])
    levels = [draw(st.floats(0.6, 1.0)) if i % 2 else draw(st.floats(0.0, 0.4))
              for i in range(knots.size)]
    return np.interp(np.arange(knots[-1] + 1), knots, levels)


@given(piecewise_columns(), st.sampled_from([5, 7, 9]))
def test_asm_invariants(v, X):
    try:
        plan = asm_sample(v, X, 64)
    except InsufficientExtrema:
        assume(False)
    assert np.all(np.diff(plan.positions) > 0)
    assert np.all(np.diff(plan.source_rows) > 0)
    at_boundary = np.isin(plan.positions, plan.boundaries)
    src = plan.source_rows[at_boundary].astype(int)
    np.testing.assert_array_equal(plan.values[at_boundary], v[src])

"""Slow, obviously-correct reference implementations used by the tests."""

import numpy as np


def brute_force_extrema(v, min_prominence, plateau="center"):
    """Scan every maximal run of equal samples and measure its prominence.

    A run is an extremum when it is interior and both neighbouring samples
    lie strictly on the same side. Prominence follows the topographic
    definition: walk outwards until a strictly more extreme sample (or the
    edge), take the least extreme value seen on each side, and measure from
    the higher (for maxima) of those two bases.
    """
    v = list(map(float, v))
    n = len(v)
    out = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and v[j + 1] == v[i]:
            j += 1
        if i > 0 and j < n - 1:
            for sign in (1, -1):
                h = sign * v[i]
                if sign * v[i - 1] < h and sign * v[j + 1] < h:
                    left = [sign * x for x in _walk(v, i - 1, -1, h, sign)]
                    right = [sign * x for x in _walk(v, j + 1, 1, h, sign)]
                    if h - max(min(left), min(right)) >= min_prominence:
                        pos = {"center": (i + j) // 2, "left": i, "right": j}[plateau]
                        out.append((pos, sign))
        i = j + 1
    return sorted(out)


def _walk(v, start, step, h, sign):
    seen = []
    k = start
    while 0 <= k < len(v) and sign * v[k] <= h:
        seen.append(v[k])
        k += step
    return seen


def brute_force_best_multiple(delta, X, N):
    best_k, best_cost = None, None
    for k in range(1, N + 1):
        cost = (delta - k * X) ** 2
        if best_cost is None or cost < best_cost:
            best_k, best_cost = k, cost
    return best_k


def knot_rows(t_start, t_row, T, rows, drift_ppm=0.0):
    """Fractional row index of every symbol boundary inside the capture."""
    scale = t_row * (1 + drift_ppm * 1e-6)
    first = int(np.ceil(t_start / T))
    last = int((t_start + (rows - 1) * scale) / T)
    k = np.arange(first, last + 1)
    return (k * T - t_start) / scale

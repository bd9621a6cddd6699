"""Naive reference implementations used as independent oracles.

Everything here is deliberately written as plain loops over Python ints with
no shared code or vectorization tricks, so the fast paths in mac.py can be
checked against genuinely independent computations.  The self-check command
and the test suite both compare against these.
"""

from __future__ import annotations


def naive_mm(a, b):
    """Triple-loop integer matrix multiply."""
    m, k = len(a), len(a[0])
    k2, n = len(b), len(b[0])
    assert k == k2
    out = [[0] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            acc = 0
            for kk in range(k):
                acc += int(a[i][kk]) * int(b[kk][j])
            out[i][j] = acc
    return out


def naive_conv(ifmap, kernel, stride=1, pad=0):
    """Direct sliding-window cross-correlation (no kernel flip)."""
    h, w, c = len(ifmap), len(ifmap[0]), len(ifmap[0][0])
    r, s = len(kernel), len(kernel[0])
    f = len(kernel[0][0][0])
    h_out = (h + 2 * pad - r) // stride + 1
    w_out = (w + 2 * pad - s) // stride + 1
    out = [[[0] * f for _ in range(w_out)] for _ in range(h_out)]
    for i in range(h_out):
        for j in range(w_out):
            for ff in range(f):
                acc = 0
                for dr in range(r):
                    for ds in range(s):
                        yy = i * stride + dr - pad
                        xx = j * stride + ds - pad
                        if 0 <= yy < h and 0 <= xx < w:
                            for cc in range(c):
                                acc += int(ifmap[yy][xx][cc]) * int(kernel[dr][ds][cc][ff])
                out[i][j][ff] = acc
    return out


# Hand-evaluated energy cases: (pl, t_sp seconds, n_neur, n_syn, sleep,
# expected joules).  The expected values come from evaluating the tick-energy
# formula by hand with the default measured parameters.
ENERGY_HAND_CASES = (
    (1, 0.0, 0, 0, True, 22.38e-6),
    (3, 0.2e-3, 250, 1000, True, 31.9245e-6),
    (3, 1.0e-3, 0, 0, False, 66.44e-6),
)

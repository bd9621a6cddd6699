"""Functional and timing model of the 4x16 8-bit MAC array.

The array multiplies 8-bit unsigned operands into 32-bit accumulators and is
output-stationary: per clock it produces partial sums for a tile of 4 output
rows (matrix rows / output-map width) by 16 output columns (matrix columns /
output channels).  Two fetch patterns exist, plain matrix multiply (MM) and
2D convolution (CONV); CONV uses cross-correlation semantics (no kernel
flip).  Results are bit-exact integer arithmetic; the timing model charges
one clock per K-step per output tile plus a fixed setup cost.

SRAM traffic is counted in 128-bit beats on the local port (operand A and
result write-back) and on the NoC port (operand B).  For CONV the shift
register lets the input map be streamed at 4 bytes per 4 clocks, which is
what the beat count models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

ARRAY_ROWS = 4
ARRAY_COLS = 16
MACS_PER_CYCLE = ARRAY_ROWS * ARRAY_COLS
DEFAULT_SETUP_CYCLES = 16
SRAM_BEAT_BYTES = 16  # 128-bit local SRAM and NoC ports

# 32-bit accumulators cannot overflow as long as the reduction depth stays
# below (2^32 - 1) / 255^2.
MAX_REDUCTION_DEPTH = (2**32 - 1) // (255 * 255)


class MacError(ValueError):
    """Raised for job descriptors the array cannot execute."""


class MacMode(Enum):
    MM = "mm"
    CONV = "conv"


@dataclass(frozen=True)
class MacTiming:
    cycles: int
    sram_beats: int
    noc_beats: int
    macs: int
    setup_cycles: int = DEFAULT_SETUP_CYCLES

    @property
    def utilization(self) -> float:
        """Fraction of MAC slots doing useful work, setup excluded."""
        compute = self.cycles - self.setup_cycles
        if compute <= 0:
            return 0.0
        return self.macs / (MACS_PER_CYCLE * compute)


def _as_u8(name: str, a: np.ndarray, ndim: int) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != ndim:
        raise MacError(f"{name} must have {ndim} dims, got {a.ndim}")
    if a.size == 0:
        raise MacError(f"{name} must be non-empty")
    if a.min() < 0 or a.max() > 255:
        raise MacError(f"{name} values must be 8-bit unsigned")
    return a.astype(np.int64)


def mm_execute(a: np.ndarray, b: np.ndarray, setup_cycles: int = DEFAULT_SETUP_CYCLES) -> tuple[np.ndarray, MacTiming]:
    """Exact M x K @ K x N multiply of 8-bit unsigned operands.

    Returns the 32-bit-accumulator result (as int64, guaranteed to fit in
    32 bits) and the cycle/traffic model.
    """
    a = _as_u8("A", a, 2)
    b = _as_u8("B", b, 2)
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise MacError(f"shape mismatch: A is {m}x{k}, B is {k2}x{n}")
    if k > MAX_REDUCTION_DEPTH:
        raise MacError(f"K={k} could overflow 32-bit accumulators")
    out = a @ b
    cycles = math.ceil(m / ARRAY_ROWS) * math.ceil(n / ARRAY_COLS) * k + setup_cycles
    timing = MacTiming(
        cycles=cycles,
        sram_beats=math.ceil(m * k / SRAM_BEAT_BYTES) + math.ceil(m * n * 4 / SRAM_BEAT_BYTES),
        noc_beats=math.ceil(k * n / SRAM_BEAT_BYTES),
        macs=m * k * n,
        setup_cycles=setup_cycles,
    )
    return out, timing


def conv_out_dim(size: int, kernel: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - kernel) // stride + 1


def conv_execute(
    ifmap: np.ndarray,
    kernel: np.ndarray,
    stride: int = 1,
    pad: int = 0,
    setup_cycles: int = DEFAULT_SETUP_CYCLES,
) -> tuple[np.ndarray, MacTiming]:
    """Exact 2D cross-correlation of an H x W x C map with an R x S x C x F kernel.

    Output is H_out x W_out x F in 32-bit accumulators.  The computation
    slides the kernel directly (no im2col restructuring), so it provides an
    independent path against the im2col-plus-MM route.
    """
    ifmap = _as_u8("ifmap", ifmap, 3)
    kernel = _as_u8("kernel", kernel, 4)
    h, w, c = ifmap.shape
    r, s, kc, f = kernel.shape
    if kc != c:
        raise MacError(f"channel mismatch: ifmap has {c}, kernel has {kc}")
    if stride < 1 or pad < 0:
        raise MacError("stride must be >= 1 and pad >= 0")
    h_out = conv_out_dim(h, r, stride, pad)
    w_out = conv_out_dim(w, s, stride, pad)
    if h_out < 1 or w_out < 1:
        raise MacError("zero-size output feature map")
    if r * s * c > MAX_REDUCTION_DEPTH:
        raise MacError(f"reduction depth {r * s * c} could overflow accumulators")

    padded = np.zeros((h + 2 * pad, w + 2 * pad, c), dtype=np.int64)
    padded[pad:pad + h, pad:pad + w, :] = ifmap
    out = np.zeros((h_out, w_out, f), dtype=np.int64)
    # Accumulate one kernel tap at a time over the whole output plane.
    for dr in range(r):
        for ds in range(s):
            window = padded[
                dr:dr + stride * h_out:stride,
                ds:ds + stride * w_out:stride,
                :,
            ]
            out += window @ kernel[dr, ds]

    compute_cycles = (
        math.ceil(w_out / ARRAY_ROWS) * math.ceil(f / ARRAY_COLS) * h_out * r * s * c
    )
    macs = h_out * w_out * f * r * s * c
    timing = MacTiming(
        cycles=compute_cycles + setup_cycles,
        # shift register relaxes the ifmap stream to 4 bytes per 4 clocks
        sram_beats=math.ceil(compute_cycles / SRAM_BEAT_BYTES)
        + math.ceil(h_out * w_out * f * 4 / SRAM_BEAT_BYTES),
        noc_beats=math.ceil(r * s * c * f / SRAM_BEAT_BYTES),
        macs=macs,
        setup_cycles=setup_cycles,
    )
    return out, timing


def im2col(ifmap: np.ndarray, r: int, s: int, stride: int = 1, pad: int = 0) -> np.ndarray:
    """Unfold an H x W x C map into an (H_out*W_out) x (R*S*C) patch matrix."""
    ifmap = np.asarray(ifmap)
    h, w, c = ifmap.shape
    h_out = conv_out_dim(h, r, stride, pad)
    w_out = conv_out_dim(w, s, stride, pad)
    if h_out < 1 or w_out < 1:
        raise MacError("zero-size output feature map")
    padded = np.zeros((h + 2 * pad, w + 2 * pad, c), dtype=ifmap.dtype)
    padded[pad:pad + h, pad:pad + w, :] = ifmap
    rows = np.empty((h_out * w_out, r * s * c), dtype=ifmap.dtype)
    idx = 0
    for i in range(h_out):
        for j in range(w_out):
            patch = padded[i * stride:i * stride + r, j * stride:j * stride + s, :]
            rows[idx] = patch.reshape(-1)
            idx += 1
    return rows


def conv_via_mm(
    ifmap: np.ndarray, kernel: np.ndarray, stride: int = 1, pad: int = 0
) -> np.ndarray:
    """CONV result computed through the MM datapath (for cross-mode checks)."""
    r, s, c, f = kernel.shape
    patches = im2col(ifmap, r, s, stride, pad)
    out, _ = mm_execute(patches, kernel.reshape(r * s * c, f))
    h_out = conv_out_dim(ifmap.shape[0], r, stride, pad)
    w_out = conv_out_dim(ifmap.shape[1], s, stride, pad)
    return out.reshape(h_out, w_out, f)


def peak_macs_per_s(freq_hz: float) -> float:
    return MACS_PER_CYCLE * freq_hz


def peak_ops_per_s(freq_hz: float) -> float:
    """Multiply and add counted separately, the usual OPS convention."""
    return 2 * peak_macs_per_s(freq_hz)

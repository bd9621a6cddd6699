"""Deterministic random-number streams for reproducible simulations.

Every consumer of randomness gets its own counter-based Philox stream keyed
by (run seed, stream id).  Streams are independent of each other and of the
order in which they are created, so adding a new consumer never perturbs the
draws seen by existing ones.  Identical (seed, stream id) pairs produce
bit-identical draws on every platform, which is what makes whole-simulation
traces byte-reproducible.

Gaussian draws go through numpy's Generator.normal (ziggurat); that choice is
part of the reproducibility contract and must not be swapped silently.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream-id bases, one block per subsystem.  Offsets within a block are the
# entity index (PE number, layer number, ...).  Keep these stable: changing
# them changes every trace.
STREAM_PE_NOISE = 0x0100_0000
STREAM_SYNFIRE_BUILD = 0x0200_0000
STREAM_STIMULUS = 0x0300_0000
STREAM_NEF_BUILD = 0x0400_0000
STREAM_DNN_DATA = 0x0500_0000
STREAM_TRAFFIC = 0x0600_0000


def stream(seed: int, stream_id: int) -> np.random.Generator:
    """Return the deterministic generator for (seed, stream_id)."""
    key = np.array([seed & _MASK64, stream_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def pe_noise_stream(seed: int, pe: int) -> np.random.Generator:
    return stream(seed, STREAM_PE_NOISE + pe)

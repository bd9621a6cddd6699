import os
import sys

import numpy as np
import pytest
from hypothesis import strategies as st

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

from spinnsim.packets import DNocPacket, PacketClass, SpinnKind, SpinnPacket


@st.composite
def dnoc_packets(draw):
    klass = draw(st.sampled_from(list(PacketClass)))
    min_mask = 1 if klass in (PacketClass.SPIKE, PacketClass.INTERRUPT) else 0
    payload_len = draw(st.integers(0, 4))
    return DNocPacket(
        dest_x=draw(st.integers(0, 15)),
        dest_y=draw(st.integers(0, 15)),
        dest_pe_mask=draw(st.integers(min_mask, 15)),
        packet_class=klass,
        cmd=draw(st.integers(0, 31)),
        tag=draw(st.integers(0, 255)),
        address=draw(st.integers(0, 2**32 - 1)),
        payload=tuple(
            draw(st.lists(st.integers(0, 2**32 - 1), min_size=payload_len,
                          max_size=payload_len))
        ),
    )


@st.composite
def spinn_packets(draw):
    kind = draw(st.sampled_from(list(SpinnKind)))
    if kind == SpinnKind.NEAREST_NEIGHBOUR:
        key = draw(st.integers(1, 63))
    else:
        key = draw(st.integers(0, 2**32 - 1))
    return SpinnPacket(
        kind=kind,
        key_or_addr=key,
        payload=draw(st.one_of(st.none(), st.integers(0, 2**32 - 1))),
        timestamp=draw(st.integers(0, 3)),
        emergency=draw(st.integers(0, 3)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

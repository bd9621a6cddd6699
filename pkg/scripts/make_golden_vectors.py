#!/usr/bin/env python3
"""Regenerate the frozen packet golden vectors.

Run only when the wire format deliberately changes; the committed file under
src/spinnsim/data/ is the regression reference and `spinnsim verify` plus the
test suite check encodings against it byte for byte.
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from spinnsim import rng as rngmod
from spinnsim.packets import (
    DNocPacket,
    PacketClass,
    SpinnKind,
    SpinnPacket,
    encode_dnoc,
    encode_spinn,
)

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "spinnsim", "data",
                   "golden_packets.json")


def random_dnoc(gen) -> DNocPacket:
    plen = int(gen.integers(0, 5))
    klass = PacketClass(int(gen.integers(0, 5)))
    mask = int(gen.integers(0, 16))
    if klass in (PacketClass.SPIKE, PacketClass.INTERRUPT):
        mask = mask or 1
    return DNocPacket(
        dest_x=int(gen.integers(0, 16)),
        dest_y=int(gen.integers(0, 16)),
        dest_pe_mask=mask,
        packet_class=klass,
        cmd=int(gen.integers(0, 32)),
        tag=int(gen.integers(0, 256)),
        address=int(gen.integers(0, 2**32)),
        payload=tuple(int(w) for w in gen.integers(0, 2**32, plen)),
    )


def random_spinn(gen) -> SpinnPacket:
    kind = SpinnKind(int(gen.integers(0, 3)))
    key = int(gen.integers(0, 2**32))
    if kind == SpinnKind.NEAREST_NEIGHBOUR:
        key &= 0x3F
        key = key or 1
    payload = int(gen.integers(0, 2**32)) if gen.integers(0, 2) else None
    return SpinnPacket(
        kind=kind,
        key_or_addr=key,
        payload=payload,
        timestamp=int(gen.integers(0, 4)),
        emergency=int(gen.integers(0, 4)),
    )


def main() -> None:
    vectors = []
    fixed = [
        ("dnoc_zero_config", DNocPacket(0, 0, 0, PacketClass.CONFIG)),
        ("dnoc_spike_example", DNocPacket(2, 1, 0b0011, PacketClass.SPIKE,
                                          payload=(0xDEADBEEF,))),
        ("dnoc_max_payload", DNocPacket(15, 15, 0xF, PacketClass.DATA, cmd=31,
                                        tag=255, address=0xFFFFFFFF,
                                        payload=(0xFFFFFFFF,) * 4)),
        ("spinn_mc_zero", SpinnPacket(SpinnKind.MULTICAST, 0)),
        ("spinn_mc_payload", SpinnPacket(SpinnKind.MULTICAST, 0x00000800,
                                         payload=0x12345678)),
        ("spinn_nn_ports45", SpinnPacket(SpinnKind.NEAREST_NEIGHBOUR, 0b110000)),
    ]
    gen = rngmod.stream(0xC0DE, 999)
    items = list(fixed)
    i = 0
    while len(items) < 32:
        if i % 2 == 0:
            items.append((f"dnoc_rand_{i:02d}", random_dnoc(gen)))
        else:
            items.append((f"spinn_rand_{i:02d}", random_spinn(gen)))
        i += 1
    for name, pkt in items:
        if isinstance(pkt, DNocPacket):
            fields = {
                "dest_x": pkt.dest_x, "dest_y": pkt.dest_y,
                "dest_pe_mask": pkt.dest_pe_mask,
                "packet_class": int(pkt.packet_class), "cmd": pkt.cmd,
                "tag": pkt.tag, "address": pkt.address,
                "payload": list(pkt.payload),
            }
            vectors.append({"name": name, "family": "dnoc", "fields": fields,
                            "hex": encode_dnoc(pkt).hex()})
        else:
            fields = {
                "kind": int(pkt.kind), "key_or_addr": pkt.key_or_addr,
                "payload": pkt.payload, "timestamp": pkt.timestamp,
                "emergency": pkt.emergency,
            }
            vectors.append({"name": name, "family": "spinn", "fields": fields,
                            "hex": encode_spinn(pkt).hex()})
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as fh:
        json.dump(vectors, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(vectors)} vectors to {OUT}")


if __name__ == "__main__":
    main()

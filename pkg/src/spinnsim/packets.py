"""Bit-exact wire formats for the two packet families.

Two packet types cross the chip: 192-bit-max NoC packets (shared by the data
and configuration NoCs) and the lighter spike-router packets (multicast /
core-to-core / nearest-neighbour).  The field layouts below are the canonical
wire format of this simulator and are documented in WIRE_FORMAT.md; encode and
decode are exact inverses on the full valid domain and reject anything else.

NoC packet layout, most-significant field first:

    dest_x(4) dest_y(4) dest_pe_mask(4) class(3)   -- 15-bit NoC header
    cmd(5) tag(8) payload_len(4)                   -- 17-bit packet header
    address(32)
    payload word 0 .. payload word payload_len-1   -- 32-bit words, 0..4

so a frame is exactly 64 + 32*payload_len bits (8 + 4*payload_len bytes).

Spike-router packet layout, most-significant field first:

    kind(2) payload_present(1) timestamp(2) emergency(2) parity(1)
    key_or_addr(32)
    [payload(32)]

The parity bit is set so the whole serialized frame has even parity; any
single-bit corruption is therefore detectable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class PacketError(ValueError):
    """Raised for invalid packet field values."""


class MalformedFrame(PacketError):
    """Raised when a byte string cannot be decoded as a packet."""


class PacketClass(IntEnum):
    DATA = 0
    SPIKE = 1
    INTERRUPT = 2
    CONFIG = 3
    TEST = 4


class SpinnKind(IntEnum):
    MULTICAST = 0
    CORE_TO_CORE = 1
    NEAREST_NEIGHBOUR = 2


MAX_PAYLOAD_WORDS = 4
NOC_HEADER_BITS = 15
PKT_HEADER_BITS = 17
BASE_FRAME_BYTES = 8  # headers + address, zero payload

# Packet classes that are inherently PE-bound and so need a nonzero
# dest_pe_mask.  Data, config and test frames may instead target the
# router/QPE fabric or chip-level resources (mask 0).
_PE_ADDRESSED = frozenset({PacketClass.SPIKE, PacketClass.INTERRUPT})


def _check_field(name: str, value: int, bits: int) -> None:
    if not 0 <= value < (1 << bits):
        raise PacketError(f"{name}={value!r} does not fit in {bits} bits")


@dataclass(frozen=True)
class DNocPacket:
    """One 192-bit-max NoC packet (used by both the data and config NoCs)."""

    dest_x: int
    dest_y: int
    dest_pe_mask: int
    packet_class: PacketClass
    cmd: int = 0
    tag: int = 0
    address: int = 0
    payload: tuple[int, ...] = ()

    @property
    def payload_len(self) -> int:
        return len(self.payload)

    def validate(self) -> None:
        _check_field("dest_x", self.dest_x, 4)
        _check_field("dest_y", self.dest_y, 4)
        _check_field("dest_pe_mask", self.dest_pe_mask, 4)
        _check_field("packet_class", int(self.packet_class), 3)
        _check_field("cmd", self.cmd, 5)
        _check_field("tag", self.tag, 8)
        _check_field("address", self.address, 32)
        if len(self.payload) > MAX_PAYLOAD_WORDS:
            raise PacketError(
                f"payload_len={len(self.payload)} exceeds {MAX_PAYLOAD_WORDS} words"
            )
        for i, word in enumerate(self.payload):
            _check_field(f"payload[{i}]", word, 32)
        if PacketClass(self.packet_class) in _PE_ADDRESSED and self.dest_pe_mask == 0:
            raise PacketError("PE-addressed packet needs a nonzero dest_pe_mask")

    def frame_bytes(self) -> int:
        return BASE_FRAME_BYTES + 4 * len(self.payload)


def encode_dnoc(pkt: DNocPacket) -> bytes:
    """Serialize to the canonical big-endian frame; rejects invalid packets."""
    pkt.validate()
    v = pkt.dest_x
    v = (v << 4) | pkt.dest_y
    v = (v << 4) | pkt.dest_pe_mask
    v = (v << 3) | int(pkt.packet_class)
    v = (v << 5) | pkt.cmd
    v = (v << 8) | pkt.tag
    v = (v << 4) | len(pkt.payload)
    v = (v << 32) | pkt.address
    for word in pkt.payload:
        v = (v << 32) | word
    return v.to_bytes(pkt.frame_bytes(), "big")


def decode_dnoc(frame: bytes) -> DNocPacket:
    """Inverse of encode_dnoc; raises MalformedFrame on any length mismatch."""
    if len(frame) < BASE_FRAME_BYTES:
        raise MalformedFrame(f"frame truncated: {len(frame)} bytes")
    v = int.from_bytes(frame, "big")
    total_bits = 8 * len(frame)
    take = total_bits

    def bits(n: int) -> int:
        nonlocal take
        take -= n
        return (v >> take) & ((1 << n) - 1)

    dest_x = bits(4)
    dest_y = bits(4)
    dest_pe_mask = bits(4)
    klass = bits(3)
    cmd = bits(5)
    tag = bits(8)
    payload_len = bits(4)
    address = bits(32)
    expected = BASE_FRAME_BYTES + 4 * payload_len
    if len(frame) != expected:
        raise MalformedFrame(
            f"frame is {len(frame)} bytes but header says {expected}"
        )
    payload = tuple(bits(32) for _ in range(payload_len))
    try:
        pkt = DNocPacket(
            dest_x=dest_x,
            dest_y=dest_y,
            dest_pe_mask=dest_pe_mask,
            packet_class=PacketClass(klass),
            cmd=cmd,
            tag=tag,
            address=address,
            payload=payload,
        )
        pkt.validate()
    except ValueError as exc:  # covers unknown class values and invariants
        raise MalformedFrame(str(exc)) from exc
    return pkt


@dataclass(frozen=True)
class SpinnPacket:
    """One spike-router packet: multicast, core-to-core or nearest-neighbour."""

    kind: SpinnKind
    key_or_addr: int
    payload: int | None = None
    timestamp: int = 0
    emergency: int = 0

    @property
    def payload_present(self) -> bool:
        return self.payload is not None

    def validate(self) -> None:
        _check_field("kind", int(self.kind), 2)
        _check_field("timestamp", self.timestamp, 2)
        _check_field("emergency", self.emergency, 2)
        _check_field("key_or_addr", self.key_or_addr, 32)
        if self.payload is not None:
            _check_field("payload", self.payload, 32)
        if self.kind == SpinnKind.NEAREST_NEIGHBOUR and self.key_or_addr >= 64:
            raise PacketError("nearest-neighbour packets use only port bits 0..5")

    def frame_bytes(self) -> int:
        return 9 if self.payload is not None else 5


def _spinn_body(pkt: SpinnPacket) -> int:
    """Serialized frame with the parity bit left at zero."""
    v = int(pkt.kind)
    v = (v << 1) | (1 if pkt.payload is not None else 0)
    v = (v << 2) | pkt.timestamp
    v = (v << 2) | pkt.emergency
    v = (v << 1)  # parity slot
    v = (v << 32) | pkt.key_or_addr
    if pkt.payload is not None:
        v = (v << 32) | pkt.payload
    return v


def spinn_parity(pkt: SpinnPacket) -> int:
    """Parity bit value: XOR of every serialized bit except the parity slot."""
    pkt.validate()
    return _parity_of(_spinn_body(pkt))


def _parity_of(v: int) -> int:
    return bin(v).count("1") & 1


def encode_spinn(pkt: SpinnPacket) -> bytes:
    pkt.validate()
    body = _spinn_body(pkt)
    parity_shift = 32 * (2 if pkt.payload is not None else 1)
    body |= _parity_of(body) << parity_shift
    return body.to_bytes(pkt.frame_bytes(), "big")


def decode_spinn(frame: bytes) -> SpinnPacket:
    """Inverse of encode_spinn; verifies length, flags and even parity."""
    if len(frame) not in (5, 9):
        raise MalformedFrame(f"spike packet frames are 5 or 9 bytes, got {len(frame)}")
    v = int.from_bytes(frame, "big")
    if _parity_of(v) != 0:
        raise MalformedFrame("parity check failed")
    take = 8 * len(frame)

    def bits(n: int) -> int:
        nonlocal take
        take -= n
        return (v >> take) & ((1 << n) - 1)

    kind = bits(2)
    payload_present = bits(1)
    timestamp = bits(2)
    emergency = bits(2)
    bits(1)  # parity, already verified
    key_or_addr = bits(32)
    payload = None
    if payload_present:
        if len(frame) != 9:
            raise MalformedFrame("payload_present set on a 5-byte frame")
        payload = bits(32)
    elif len(frame) == 9:
        raise MalformedFrame("9-byte frame without payload_present")
    try:
        pkt = SpinnPacket(
            kind=SpinnKind(kind),
            key_or_addr=key_or_addr,
            payload=payload,
            timestamp=timestamp,
            emergency=emergency,
        )
        pkt.validate()
    except ValueError as exc:
        raise MalformedFrame(str(exc)) from exc
    return pkt

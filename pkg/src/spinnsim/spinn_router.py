"""Chip-level spike packet router.

Three packet classes are routed by three different mechanisms: multicast
packets carry a source-assigned key that is matched against a key/mask table
(first matching entry wins, a miss takes the default route); core-to-core
packets carry a (chip_x, chip_y, pe) destination address; nearest-neighbour
packets select external links directly through a 6-bit port set.

Blocked packets age per output and are moved to a drop log once their stall
exceeds the configured timeout; conservation (injected == delivered +
dropped, per class) holds at all times and is asserted by the tests.

Routing tables load from CSV rows ``key,mask,route_list`` (route tokens like
``PE3`` or ``L0`` separated by ``;``) and can also be installed at runtime
through configuration-NoC write packets, one table entry per packet:
address = entry index, payload = (key, mask, route bitmap), where route
bitmap bits 0..15 select PEs 0..15 and bits 16..21 select links 0..5.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .packets import SpinnPacket, SpinnKind

N_LINKS = 6
DEFAULT_DROP_TIMEOUT = 128  # router cycles a packet may stall before dropping
DEFAULT_TABLE_CAPACITY = 1024


class DestKind(Enum):
    PE = "PE"
    LINK = "L"


@dataclass(frozen=True)
class Dest:
    kind: DestKind
    index: int

    def __str__(self) -> str:
        return f"{self.kind.value}{self.index}"

    def __lt__(self, other: "Dest") -> bool:
        return (self.kind.value, self.index) < (other.kind.value, other.index)

    @staticmethod
    def parse(token: str) -> "Dest":
        token = token.strip()
        if token.upper().startswith("PE"):
            return Dest(DestKind.PE, int(token[2:]))
        if token.upper().startswith("L"):
            link = int(token[1:])
            if not 0 <= link < N_LINKS:
                raise ValueError(f"link index out of range: {token}")
            return Dest(DestKind.LINK, link)
        raise ValueError(f"unparseable route token: {token!r}")


def pe(index: int) -> Dest:
    return Dest(DestKind.PE, index)


def link(index: int) -> Dest:
    return Dest(DestKind.LINK, index)


@dataclass(frozen=True)
class RoutingEntry:
    key: int
    mask: int
    route: frozenset[Dest]

    def validate(self) -> None:
        if not 0 <= self.key < 2**32 or not 0 <= self.mask < 2**32:
            raise ValueError("key and mask must be 32-bit")
        if self.key & ~self.mask & 0xFFFFFFFF:
            raise ValueError("don't-care bits of the key must be zero")
        if not self.route:
            raise ValueError("route set must be nonempty")

    def matches(self, key: int) -> bool:
        return (key & self.mask) == self.key


class RoutingTable:
    """Ordered key/mask table; lowest matching index wins."""

    def __init__(self, default_route: int = 0, capacity: int = DEFAULT_TABLE_CAPACITY):
        if not 0 <= default_route < N_LINKS:
            raise ValueError("default route must be an external link id")
        self.entries: list[RoutingEntry] = []
        self.default_route = default_route
        self.capacity = capacity

    def add(self, entry: RoutingEntry, index: int | None = None) -> None:
        entry.validate()
        if len(self.entries) >= self.capacity and index is None:
            raise ValueError(f"table capacity {self.capacity} exceeded")
        if index is None:
            self.entries.append(entry)
        else:
            while len(self.entries) <= index:
                self.entries.append(None)  # type: ignore[arg-type]
            self.entries[index] = entry

    def lookup(self, key: int, arrival_link: int | None = None) -> frozenset[Dest]:
        """First-match destinations; a miss default-routes out one link.

        The default is the link opposite the arrival link when the packet
        came in over one, otherwise the configured default link.
        """
        for entry in self.entries:
            if entry is not None and entry.matches(key):
                return entry.route
        if arrival_link is not None:
            return frozenset({link((arrival_link + N_LINKS // 2) % N_LINKS)})
        return frozenset({link(self.default_route)})

    @staticmethod
    def from_csv(path: str, default_route: int = 0, capacity: int = DEFAULT_TABLE_CAPACITY) -> "RoutingTable":
        table = RoutingTable(default_route=default_route, capacity=capacity)
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                route = frozenset(Dest.parse(tok) for tok in row["route_list"].split(";") if tok.strip())
                table.add(RoutingEntry(int(row["key"], 0), int(row["mask"], 0), route))
        return table

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["key", "mask", "route_list"])
            for entry in self.entries:
                if entry is None:
                    continue
                tokens = ";".join(str(d) for d in sorted(entry.route))
                w.writerow([f"0x{entry.key:08X}", f"0x{entry.mask:08X}", tokens])


def route_multicast(table: RoutingTable, key: int, arrival_link: int | None = None) -> frozenset[Dest]:
    return table.lookup(key, arrival_link)


def entry_from_config_payload(payload: tuple[int, ...]) -> RoutingEntry:
    """Decode a (key, mask, route bitmap) config-packet payload."""
    if len(payload) != 3:
        raise ValueError("table config packets carry exactly 3 payload words")
    key, mask, bitmap = payload
    route = set()
    for i in range(16):
        if bitmap & (1 << i):
            route.add(pe(i))
    for i in range(N_LINKS):
        if bitmap & (1 << (16 + i)):
            route.add(link(i))
    return RoutingEntry(key, mask, frozenset(route))


def core_to_core_addr(chip_x: int, chip_y: int, pe_id: int) -> int:
    """Destination address layout: chip_x(8) chip_y(8) reserved(8) pe(8)."""
    if not (0 <= chip_x < 256 and 0 <= chip_y < 256 and 0 <= pe_id < 256):
        raise ValueError("address fields out of range")
    return (chip_x << 24) | (chip_y << 16) | pe_id


def split_core_to_core_addr(addr: int) -> tuple[int, int, int]:
    return (addr >> 24) & 0xFF, (addr >> 16) & 0xFF, addr & 0xFF


@dataclass
class DropRecord:
    cycle: int
    reason: str
    pkt: SpinnPacket


@dataclass
class RouterCounters:
    injected: dict = field(default_factory=dict)
    delivered: dict = field(default_factory=dict)
    dropped: dict = field(default_factory=dict)

    def bump(self, counter: dict, kind: SpinnKind, n: int = 1) -> None:
        counter[kind] = counter.get(kind, 0) + n


class SpinnRouter:
    """Behavioral router with per-output stall aging and drop-on-timeout.

    Outputs are modelled as sinks that accept at most one packet per cycle
    unless the test harness marks them blocked; a real deployment drains
    them immediately (the benchmarks treat delivery as instantaneous, NoC
    latency being far below the 1 ms tick).
    """

    def __init__(
        self,
        table: RoutingTable,
        n_pes: int,
        chip_xy: tuple[int, int] = (0, 0),
        drop_timeout: int = DEFAULT_DROP_TIMEOUT,
    ):
        self.table = table
        self.n_pes = n_pes
        self.chip_xy = chip_xy
        self.drop_timeout = drop_timeout
        self.counters = RouterCounters()
        self.drop_log: list[DropRecord] = []
        # per-output queue of [stall_cycles, pkt]
        self.out_queues: dict[Dest, deque] = {}
        self.blocked: set[Dest] = set()
        self.delivered: list[tuple[int, Dest, SpinnPacket]] = []
        self.cycle = 0
        self.drops_per_output: dict[Dest, int] = {}

    def route(self, pkt: SpinnPacket, arrival_link: int | None = None) -> frozenset[Dest]:
        """Pure routing decision for one packet; empty set means drop."""
        pkt.validate()
        if pkt.kind == SpinnKind.MULTICAST:
            return route_multicast(self.table, pkt.key_or_addr, arrival_link)
        if pkt.kind == SpinnKind.CORE_TO_CORE:
            chip_x, chip_y, pe_id = split_core_to_core_addr(pkt.key_or_addr)
            if (chip_x, chip_y) == self.chip_xy:
                if pe_id >= self.n_pes:
                    return frozenset()
                return frozenset({pe(pe_id)})
            return frozenset({self._chip_route(chip_x, chip_y)})
        # nearest neighbour: low 6 bits select links directly
        ports = pkt.key_or_addr & 0x3F
        if ports == 0:
            return frozenset()
        return frozenset(link(i) for i in range(N_LINKS) if ports & (1 << i))

    def _chip_route(self, chip_x: int, chip_y: int) -> Dest:
        # Off-chip routing by coordinate sign: E/W on x first, then N/S on y.
        dx = chip_x - self.chip_xy[0]
        dy = chip_y - self.chip_xy[1]
        if dx > 0:
            return link(0)
        if dx < 0:
            return link(3)
        return link(1) if dy > 0 else link(4)

    def submit(self, pkt: SpinnPacket, arrival_link: int | None = None) -> frozenset[Dest]:
        """Route one packet and queue a copy at each destination output."""
        dests = self.route(pkt, arrival_link)
        self.counters.bump(self.counters.injected, pkt.kind)
        if not dests:
            reason = "no route (bad pe or empty port set)"
            self.drop_log.append(DropRecord(self.cycle, reason, pkt))
            self.counters.bump(self.counters.dropped, pkt.kind)
            return dests
        for d in sorted(dests):
            self.out_queues.setdefault(d, deque()).append([0, pkt])
        return dests

    def step(self) -> None:
        """One router cycle: drain one packet per free output, age the rest."""
        for dest in sorted(self.out_queues):
            q = self.out_queues[dest]
            if q and dest not in self.blocked:
                _, pkt = q.popleft()
                self.delivered.append((self.cycle, dest, pkt))
                self._count_delivery(pkt, dest)
            survivors = deque()
            for item in q:
                item[0] += 1
                if item[0] > self.drop_timeout:
                    self.drop_log.append(DropRecord(self.cycle, f"stalled at {dest}", item[1]))
                    self.drops_per_output[dest] = self.drops_per_output.get(dest, 0) + 1
                    self._count_drop_replica(item[1], dest)
                else:
                    survivors.append(item)
            self.out_queues[dest] = survivors
        self.cycle += 1

    # A multicast packet is conserved per replica: each queued copy ends up
    # delivered or dropped exactly once.
    def _count_delivery(self, pkt: SpinnPacket, dest: Dest) -> None:
        self.counters.bump(self.counters.delivered, pkt.kind)

    def _count_drop_replica(self, pkt: SpinnPacket, dest: Dest) -> None:
        self.counters.bump(self.counters.dropped, pkt.kind)


def congestion_drop(stall_cycles: int, timeout: int = DEFAULT_DROP_TIMEOUT) -> bool:
    """True when a blocked packet has overstayed the drop timeout."""
    return stall_cycles > timeout


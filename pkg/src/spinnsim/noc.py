"""Cycle-level 2D-mesh data NoC and the wormhole configuration NoC.

Each QPE router has eight input FIFOs (one per neighbour direction, one per
local PE) feeding five outputs (four directions plus local delivery) through
a crossbar.  Routing is X-first/Y-second on the destination QPE coordinate;
each output arbitrates its requesters round-robin.  A hop, i.e. traversing a
router and the link to the next one, costs a fixed 5 clock cycles in the
400 MHz NoC domain, so an uncontended packet arrives after exactly
5 * (manhattan distance) cycles; contention only ever adds waiting cycles.

Backpressure is credit-based and lossless: a packet is only granted when the
downstream FIFO has a free slot, so the fabric itself never drops packets.
The only drop reason is a destination outside the mesh.  Local delivery
replicates the packet to every PE set in its dest_pe_mask (QPE-level
multicast happens at delivery, after arbitration).

The configuration NoC is modelled separately: same XY paths, 32-bit flits in
a wormhole scheme, occupancy tracked per link.  It shares nothing with the
data NoC, which is what guarantees config traffic gets through even when the
data network is saturated.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .packets import DNocPacket, encode_dnoc

HOP_CYCLES = 5
CNOC_FLIT_BITS = 32

# Input port numbering; also the arbitration scan order.
PORT_N, PORT_E, PORT_S, PORT_W = 0, 1, 2, 3
PORT_PE0 = 4
N_INPUT_PORTS = 8

# Output selectors.
OUT_N, OUT_E, OUT_S, OUT_W, OUT_LOCAL, OUT_DROP = 0, 1, 2, 3, 4, 5
_OUTPUTS = (OUT_N, OUT_E, OUT_S, OUT_W, OUT_LOCAL)
# Entering input port at the downstream router, per output direction.
_ENTRY_PORT = {OUT_N: PORT_S, OUT_S: PORT_N, OUT_E: PORT_W, OUT_W: PORT_E}
_DELTA = {OUT_N: (0, 1), OUT_S: (0, -1), OUT_E: (1, 0), OUT_W: (-1, 0)}

PORT_NAMES = ("N", "E", "S", "W", "PE0", "PE1", "PE2", "PE3")


@dataclass(frozen=True)
class QpeCoord:
    x: int
    y: int


def route_xy(current: QpeCoord, pkt: DNocPacket, width: int, height: int) -> int:
    """X-first output port for a packet sitting at QPE ``current``.

    Returns OUT_LOCAL once both coordinates match (delivery fans out over
    dest_pe_mask) and OUT_DROP for destinations outside the mesh.
    North is +y.
    """
    if not (0 <= pkt.dest_x < width and 0 <= pkt.dest_y < height):
        return OUT_DROP
    if pkt.dest_x > current.x:
        return OUT_E
    if pkt.dest_x < current.x:
        return OUT_W
    if pkt.dest_y > current.y:
        return OUT_N
    if pkt.dest_y < current.y:
        return OUT_S
    return OUT_LOCAL


def arbitrate(rr_pointer: int, requesters: list[int], n_ports: int = N_INPUT_PORTS) -> tuple[int, int]:
    """Grant the first requester at or after the pointer, scanning cyclically.

    Returns (granted port, new pointer); the pointer advances just past the
    grant so persistent requesters share the output evenly.
    """
    if not requesters:
        raise ValueError("arbitrate needs a nonempty requester set")
    req = set(requesters)
    for off in range(n_ports):
        port = (rr_pointer + off) % n_ports
        if port in req:
            return port, (port + 1) % n_ports
    raise AssertionError("unreachable: requesters outside port range")


def hop_latency(pkt: DNocPacket) -> int:
    """Uncontended cycles per hop; contention adds waiting on top."""
    return HOP_CYCLES


@dataclass
class RouterStats:
    grants: int = 0
    stall_cycles: int = 0
    max_occupancy: int = 0


@dataclass
class Delivery:
    cycle: int
    qpe: QpeCoord
    pe: int | None  # None when the packet targets the router/QPE fabric
    pkt: DNocPacket


@dataclass
class Drop:
    cycle: int
    qpe: QpeCoord
    reason: str
    pkt: DNocPacket


class _Router:
    __slots__ = ("coord", "fifos", "reserved", "rr", "stats", "occupancy")

    def __init__(self, coord: QpeCoord):
        self.coord = coord
        # each FIFO holds (route_out, pkt) with the route precomputed on entry
        self.fifos: list[deque] = [deque() for _ in range(N_INPUT_PORTS)]
        self.reserved = [0] * N_INPUT_PORTS  # granted upstream, still in flight
        self.rr = [0] * len(_OUTPUTS)
        self.stats = RouterStats()
        self.occupancy = 0


class MeshNoc:
    """The data NoC: a width x height mesh of QPE routers."""

    def __init__(self, width: int, height: int, fifo_depth: int = 4, hop_cycles: int = HOP_CYCLES):
        if width < 1 or height < 1:
            raise ValueError("mesh dimensions must be positive")
        if fifo_depth < 1:
            raise ValueError("fifo_depth must be >= 1")
        self.width = width
        self.height = height
        self.fifo_depth = fifo_depth
        self.hop_cycles = hop_cycles
        self.routers = [[_Router(QpeCoord(x, y)) for y in range(height)] for x in range(width)]
        self.in_flight: dict[int, list] = {}  # arrival cycle -> [(router, port, pkt)]
        self.n_in_flight = 0
        self.deliveries: list[Delivery] = []
        self.drops: list[Drop] = []
        self.injected = 0
        self.completed = 0  # delivered-or-dropped packet count (multicast counts once)
        self.cycle = 0

    def router(self, x: int, y: int) -> _Router:
        return self.routers[x][y]

    def idle(self) -> bool:
        if self.n_in_flight:
            return False
        return all(r.occupancy == 0 for col in self.routers for r in col)

    def try_inject(self, pkt: DNocPacket, src: QpeCoord, pe_slot: int) -> bool:
        """Queue a packet at its source router's local port; False when full."""
        if not (0 <= pe_slot < 4):
            raise ValueError("pe_slot must be 0..3")
        r = self.router(src.x, src.y)
        port = PORT_PE0 + pe_slot
        if len(r.fifos[port]) + r.reserved[port] >= self.fifo_depth:
            return False
        self._enqueue(r, port, pkt)
        self.injected += 1
        return True

    def _enqueue(self, r: _Router, port: int, pkt: DNocPacket) -> None:
        out = route_xy(r.coord, pkt, self.width, self.height)
        if out == OUT_DROP:
            self.drops.append(Drop(self.cycle, r.coord, "dest outside mesh", pkt))
            self.completed += 1
            return
        r.fifos[port].append((out, pkt))
        r.occupancy += 1
        if r.occupancy > r.stats.max_occupancy:
            r.stats.max_occupancy = r.occupancy

    def step(self) -> None:
        """Advance one NoC clock: land in-flight packets, then arbitrate."""
        arrivals = self.in_flight.pop(self.cycle, None)
        if arrivals:
            for r, port, pkt in arrivals:
                r.reserved[port] -= 1
                self.n_in_flight -= 1
                self._enqueue(r, port, pkt)
        for col in self.routers:
            for r in col:
                if r.occupancy:
                    self._arbitrate_router(r)
        self.cycle += 1

    def _arbitrate_router(self, r: _Router) -> None:
        requests: list[list[int]] = [[], [], [], [], []]
        fifos = r.fifos
        for port in range(N_INPUT_PORTS):
            f = fifos[port]
            if f:
                requests[f[0][0]].append(port)
        for out in _OUTPUTS:
            req = requests[out]
            if not req:
                continue
            if out == OUT_LOCAL:
                granted, r.rr[out] = arbitrate(r.rr[out], req)
                _, pkt = fifos[granted].popleft()
                r.occupancy -= 1
                r.stats.grants += 1
                self._deliver(r, pkt)
                continue
            dx, dy = _DELTA[out]
            nbr = self.router(r.coord.x + dx, r.coord.y + dy)
            entry = _ENTRY_PORT[out]
            if len(nbr.fifos[entry]) + nbr.reserved[entry] >= self.fifo_depth:
                r.stats.stall_cycles += len(req)
                continue
            granted, r.rr[out] = arbitrate(r.rr[out], req)
            _, pkt = fifos[granted].popleft()
            r.occupancy -= 1
            r.stats.grants += 1
            nbr.reserved[entry] += 1
            self.n_in_flight += 1
            self.in_flight.setdefault(self.cycle + self.hop_cycles, []).append((nbr, entry, pkt))

    def _deliver(self, r: _Router, pkt: DNocPacket) -> None:
        if pkt.dest_pe_mask == 0:
            self.deliveries.append(Delivery(self.cycle, r.coord, None, pkt))
        else:
            for pe in range(4):
                if pkt.dest_pe_mask & (1 << pe):
                    self.deliveries.append(Delivery(self.cycle, r.coord, pe, pkt))
        self.completed += 1

    def run(self, max_cycles: int, sources: list["TrafficSource"] | None = None) -> int:
        """Step until all queued traffic drains; returns the finishing cycle.

        Raises RuntimeError if the budget is exhausted first, which under XY
        routing with sink-guaranteed PEs would indicate a deadlock bug.
        """
        sources = sources or []
        deadline = self.cycle + max_cycles
        while self.cycle < deadline:
            pending = False
            for s in sources:
                s.pump(self)
                pending = pending or bool(s.queue)
            if not pending and self.idle():
                return self.cycle
            self.step()
        if self.idle() and not any(s.queue for s in sources):
            return self.cycle
        raise RuntimeError(f"NoC traffic did not drain within {max_cycles} cycles")

    def stats_rows(self) -> list[tuple[str, float, str]]:
        rows = []
        for col in self.routers:
            for r in col:
                tag = f"router_{r.coord.x}_{r.coord.y}"
                rows.append((f"{tag}_grants", float(r.stats.grants), "packets"))
                rows.append((f"{tag}_stall_cycles", float(r.stats.stall_cycles), "cycles"))
                rows.append((f"{tag}_max_occupancy", float(r.stats.max_occupancy), "packets"))
        return rows


@dataclass
class TrafficSource:
    """Per (QPE, PE slot) injection queue that retries while the port is full."""

    src: QpeCoord
    pe_slot: int
    queue: deque = field(default_factory=deque)

    def pump(self, noc: MeshNoc) -> None:
        while self.queue and noc.try_inject(self.queue[0], self.src, self.pe_slot):
            self.queue.popleft()


def cnoc_flits(frame_bits: int) -> int:
    """Number of 32-bit flits needed for one packet."""
    return -(-frame_bits // CNOC_FLIT_BITS)


class CnocFabric:
    """Wormhole configuration NoC: same XY paths, 32-bit flits, own links.

    Completely independent of the data NoC, so a saturated data network never
    delays configuration traffic.  Contention between config packets is
    modelled by per-link occupancy: a link stays busy for one cycle per flit.
    """

    def __init__(self, width: int, height: int, hop_cycles: int = HOP_CYCLES):
        self.width = width
        self.height = height
        self.hop_cycles = hop_cycles
        self.link_free: dict[tuple[int, int, int], int] = {}

    def send(self, pkt: DNocPacket, src: QpeCoord, start_cycle: int = 0) -> int:
        """Deliver a packet; returns the cycle its tail arrives."""
        flits = cnoc_flits(8 * len(encode_dnoc(pkt)))
        x, y = src.x, src.y
        head = start_cycle
        while (x, y) != (pkt.dest_x, pkt.dest_y):
            out = route_xy(QpeCoord(x, y), pkt, self.width, self.height)
            if out == OUT_DROP:
                raise ValueError("CNoC destination outside mesh")
            link = (x, y, out)
            depart = max(head, self.link_free.get(link, 0))
            self.link_free[link] = depart + flits
            head = depart + self.hop_cycles
            dx, dy = _DELTA[out]
            x, y = x + dx, y + dy
        return head + flits - 1

"""Spike router: table lookup vs oracle, address routing, drops, CSV."""

import pytest

from spinnsim.packets import SpinnKind, SpinnPacket
from spinnsim.spinn_router import (
    Dest,
    DestKind,
    RoutingEntry,
    RoutingTable,
    SpinnRouter,
    congestion_drop,
    core_to_core_addr,
    entry_from_config_payload,
    link,
    pe,
    route_multicast,
    split_core_to_core_addr,
)


def table_with(*entries, default=0):
    t = RoutingTable(default_route=default)
    for e in entries:
        t.add(e)
    return t


class TestMulticastLookup:
    def test_exact_prefix_match(self):
        t = table_with(RoutingEntry(0x00000800, 0xFFFFFF00, frozenset({pe(2), pe(5)})))
        assert route_multicast(t, 0x00000800) == {pe(2), pe(5)}
        assert route_multicast(t, 0x000008FF) == {pe(2), pe(5)}

    def test_lowest_index_wins_on_overlap(self):
        t = table_with(
            RoutingEntry(0x0, 0x0, frozenset({pe(1)})),       # matches everything
            RoutingEntry(0x00000800, 0xFFFFFF00, frozenset({pe(7)})),
        )
        assert route_multicast(t, 0x00000800) == {pe(1)}

    def test_miss_takes_default_link(self):
        t = table_with(RoutingEntry(0xFF000000, 0xFF000000, frozenset({pe(0)})),
                       default=3)
        assert route_multicast(t, 0x00000001) == {link(3)}

    def test_miss_with_arrival_link_goes_opposite(self):
        t = RoutingTable(default_route=0)
        assert route_multicast(t, 5, arrival_link=1) == {link(4)}
        assert route_multicast(t, 5, arrival_link=4) == {link(1)}

    def test_random_keys_match_linear_scan_oracle(self, rng):
        entries = []
        for _ in range(64):
            mask = int(rng.integers(0, 2**32)) & int(rng.integers(0, 2**32))
            key = int(rng.integers(0, 2**32)) & mask
            route = frozenset({pe(int(rng.integers(0, 8)))})
            entries.append(RoutingEntry(key, mask, route))
        t = table_with(*entries, default=2)
        for _ in range(2000):
            key = int(rng.integers(0, 2**32))
            expected = None
            for e in entries:  # independent linear scan
                if (key & e.mask) == e.key:
                    expected = e.route
                    break
            if expected is None:
                expected = frozenset({link(2)})
            assert t.lookup(key) == expected

    def test_dont_care_bits_in_key_rejected(self):
        with pytest.raises(ValueError):
            RoutingEntry(0x00000801, 0xFFFFFF00, frozenset({pe(0)})).validate()

    def test_empty_route_rejected(self):
        with pytest.raises(ValueError):
            RoutingEntry(0, 0xFFFFFFFF, frozenset()).validate()

    def test_capacity_enforced(self):
        t = RoutingTable(capacity=2)
        t.add(RoutingEntry(0, 0xFFFFFFFF, frozenset({pe(0)})))
        t.add(RoutingEntry(1, 0xFFFFFFFF, frozenset({pe(0)})))
        with pytest.raises(ValueError):
            t.add(RoutingEntry(2, 0xFFFFFFFF, frozenset({pe(0)})))


class TestCoreToCore:
    def make_router(self):
        return SpinnRouter(RoutingTable(), n_pes=8, chip_xy=(0, 0))

    def test_addr_split_roundtrip(self):
        addr = core_to_core_addr(3, 7, 42)
        assert split_core_to_core_addr(addr) == (3, 7, 42)

    def test_local_pe_delivery(self):
        r = self.make_router()
        pkt = SpinnPacket(SpinnKind.CORE_TO_CORE, core_to_core_addr(0, 0, 3))
        assert r.route(pkt) == {pe(3)}

    def test_unknown_pe_dropped_and_logged(self):
        r = self.make_router()
        pkt = SpinnPacket(SpinnKind.CORE_TO_CORE, core_to_core_addr(0, 0, 200))
        assert r.submit(pkt) == frozenset()
        assert len(r.drop_log) == 1
        assert r.counters.dropped[SpinnKind.CORE_TO_CORE] == 1

    def test_offchip_takes_a_link(self):
        # chip coordinates are unsigned: x above this chip goes east (link 0),
        # y above goes north (link 1)
        r = self.make_router()
        east = SpinnPacket(SpinnKind.CORE_TO_CORE, core_to_core_addr(1, 0, 0))
        assert r.route(east) == {link(0)}
        north = SpinnPacket(SpinnKind.CORE_TO_CORE, core_to_core_addr(0, 5, 0))
        assert r.route(north) == {link(1)}

    def test_roundtrip_scenario_two_deliveries(self):
        r = self.make_router()
        a = SpinnPacket(SpinnKind.CORE_TO_CORE, core_to_core_addr(0, 0, 7))
        b = SpinnPacket(SpinnKind.CORE_TO_CORE, core_to_core_addr(0, 0, 0))
        r.submit(a)
        r.submit(b)
        r.step()
        assert len(r.delivered) == 2
        assert r.counters.delivered[SpinnKind.CORE_TO_CORE] == 2


class TestNearestNeighbour:
    def test_single_port(self):
        r = SpinnRouter(RoutingTable(), n_pes=8)
        pkt = SpinnPacket(SpinnKind.NEAREST_NEIGHBOUR, 0b000001)
        assert r.route(pkt) == {link(0)}

    def test_two_ports(self):
        r = SpinnRouter(RoutingTable(), n_pes=8)
        pkt = SpinnPacket(SpinnKind.NEAREST_NEIGHBOUR, 0b110000)
        assert r.route(pkt) == {link(4), link(5)}

    def test_zero_ports_dropped_with_log(self):
        r = SpinnRouter(RoutingTable(), n_pes=8)
        pkt = SpinnPacket(SpinnKind.NEAREST_NEIGHBOUR, 0)
        assert r.submit(pkt) == frozenset()
        assert len(r.drop_log) == 1


class TestCongestion:
    def test_short_stall_keeps_packet(self):
        assert not congestion_drop(10)
        assert not congestion_drop(128)

    def test_timeout_drops_packet(self):
        assert congestion_drop(129)

    def test_saturating_one_sink_conserves_packets(self):
        table = table_with(RoutingEntry(0, 0x0, frozenset({pe(0)})))
        r = SpinnRouter(table, n_pes=8, drop_timeout=16)
        r.blocked.add(pe(0))
        n = 400
        for i in range(n):
            r.submit(SpinnPacket(SpinnKind.MULTICAST, i))
            r.step()
        r.blocked.discard(pe(0))
        for _ in range(n + 20):
            r.step()
        injected = r.counters.injected[SpinnKind.MULTICAST]
        delivered = r.counters.delivered.get(SpinnKind.MULTICAST, 0)
        dropped = r.counters.dropped.get(SpinnKind.MULTICAST, 0)
        assert injected == n
        assert dropped > 0
        assert delivered + dropped == injected
        assert r.drops_per_output[pe(0)] == dropped


class TestTableIo:
    def test_csv_roundtrip(self, tmp_path):
        t = table_with(
            RoutingEntry(0x00010000, 0xFFFF8000, frozenset({pe(1)})),
            RoutingEntry(0x00018000, 0xFFFF8000, frozenset({pe(0), link(2)})),
        )
        path = tmp_path / "routes.csv"
        t.to_csv(str(path))
        loaded = RoutingTable.from_csv(str(path))
        assert [e.key for e in loaded.entries] == [e.key for e in t.entries]
        assert [e.route for e in loaded.entries] == [e.route for e in t.entries]

    def test_config_packet_install(self):
        # payload = key, mask, bitmap (PE2, PE5, link 0)
        bitmap = (1 << 2) | (1 << 5) | (1 << 16)
        entry = entry_from_config_payload((0x00000800, 0xFFFFFF00, bitmap))
        assert entry.route == frozenset({pe(2), pe(5), link(0)})

    def test_dest_parse(self):
        assert Dest.parse("PE3") == pe(3)
        assert Dest.parse("L5") == link(5)
        with pytest.raises(ValueError):
            Dest.parse("L9")
        with pytest.raises(ValueError):
            Dest.parse("banana")

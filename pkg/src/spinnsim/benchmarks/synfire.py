"""Synfire-chain benchmark: a ring of excitatory/inhibitory layers.

Each PE hosts one layer: an excitatory population and an inhibitory
population.  Both receive excitatory input from the previous layer's
excitatory population (fixed fan-in per neuron, 10 ms delay); the excitatory
population additionally receives inhibitory input from its own layer's
inhibitory population (8 ms delay).  The last layer feeds the first, closing
the ring, and a stimulus pulse packet delivered to the first PE starts the
travelling wave.

Spike keys encode (layer, population, neuron):

    key = layer << 16 | population << 15 | index      population: 0 exc, 1 inh

and the multicast routing table carries two key/mask entries per layer: the
excitatory prefix routes to the next PE in the ring, the inhibitory prefix
loops back to its own PE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng as rngmod
from ..config import SimConfig, SynfireSpec
from ..kernel import SimReport, SpikingEngine, TickHooks
from ..pe import PeModel, SynapseGroup
from ..spinn_router import DestKind, RoutingEntry, RoutingTable, pe as pe_dest

POP_BIT = 15
LAYER_SHIFT = 16


def spike_key(layer: int, inhibitory: bool, index: int) -> int:
    return (layer << LAYER_SHIFT) | (int(inhibitory) << POP_BIT) | index


def split_key(key: int) -> tuple[int, bool, int]:
    return key >> LAYER_SHIFT, bool(key & (1 << POP_BIT)), key & 0x7FFF


@dataclass
class SynfireNetwork:
    spec: SynfireSpec
    pes: list[PeModel]
    table: RoutingTable
    stimulus: dict[int, list[tuple[int, int]]]  # tick -> [(pe, key)]
    synapses_per_pe: int
    total_synapses: int

    @property
    def avg_fan_out(self) -> float:
        total_neurons = self.spec.n_pes * self.spec.neurons_per_pe
        return self.total_synapses / total_neurons


def _fanin_draw(gen: np.random.Generator, n_targets: int, pool: int, fanin: int) -> np.ndarray:
    """fanin distinct sources out of ``pool`` for each of ``n_targets`` neurons."""
    return np.argsort(gen.random((n_targets, pool)), axis=1)[:, :fanin]


def _reverse_map(draws: np.ndarray, pool: int) -> list[np.ndarray]:
    """Invert fan-in draws into per-source target-index arrays."""
    n_targets, fanin = draws.shape
    rows = np.repeat(np.arange(n_targets), fanin)
    cols = draws.reshape(-1)
    order = np.argsort(cols, kind="stable")
    cols_sorted = cols[order]
    rows_sorted = rows[order]
    bounds = np.searchsorted(cols_sorted, np.arange(pool + 1))
    return [rows_sorted[bounds[j]:bounds[j + 1]] for j in range(pool)]


def build_synfire(config: SimConfig) -> SynfireNetwork:
    """Construct the ring, its synapse maps, routing table and stimulus."""
    spec = config.benchmark
    assert isinstance(spec, SynfireSpec)
    spec.validate()
    n_layers = spec.n_pes
    exc, inh = spec.exc_per_layer, spec.inh_per_layer
    n_total = spec.neurons_per_pe
    t_sys_ms = config.energy.t_sys_s * 1e3
    delay_exc = int(round(spec.delay_exc_to_next_ms / t_sys_ms))
    delay_inh = int(round(spec.delay_inh_to_exc_ms / t_sys_ms))
    max_delay = max(delay_exc, delay_inh)

    keys_per_pe = np.array(
        [spike_key(0, idx >= exc, idx if idx < exc else idx - exc) for idx in range(n_total)]
    )

    pes: list[PeModel] = []
    table = RoutingTable(default_route=0, capacity=config.router.table_capacity)
    for layer in range(n_layers):
        pes.append(
            PeModel(
                pe_id=layer,
                n_neurons=n_total,
                params=config.neuron,
                budget=config.budget,
                thresholds=config.thresholds,
                pl_freqs_hz=config.pl_freqs_hz,
                noise_rng=rngmod.pe_noise_stream(config.rng_seed, layer),
                spike_keys=keys_per_pe + (layer << LAYER_SHIFT),
                max_delay_ticks=max_delay,
                t_sys_s=config.energy.t_sys_s,
                fifo_capacity=config.fifo_capacity,
            )
        )
        table.add(RoutingEntry(
            key=spike_key(layer, False, 0),
            mask=0xFFFF8000,
            route=frozenset({pe_dest((layer + 1) % n_layers)}),
        ))
        table.add(RoutingEntry(
            key=spike_key(layer, True, 0),
            mask=0xFFFF8000,
            route=frozenset({pe_dest(layer)}),
        ))

    synapse_count = 0
    for layer in range(n_layers):
        gen = rngmod.stream(config.rng_seed, rngmod.STREAM_SYNFIRE_BUILD + layer)
        prev = (layer - 1) % n_layers
        # every neuron of this layer draws its excitatory fan-in from the
        # previous layer's excitatory population
        exc_draws = _fanin_draw(gen, n_total, exc, spec.fanin_exc)
        for j, targets in enumerate(_reverse_map(exc_draws, exc)):
            pes[layer].add_synapse_group(
                spike_key(prev, False, j),
                SynapseGroup(targets=targets, weight_mv=spec.w_exc_mv, delay_ticks=delay_exc),
            )
        # excitatory neurons additionally draw inhibitory fan-in from their
        # own layer's inhibitory population
        inh_draws = _fanin_draw(gen, exc, inh, spec.fanin_inh)
        for j, targets in enumerate(_reverse_map(inh_draws, inh)):
            pes[layer].add_synapse_group(
                spike_key(layer, True, j),
                SynapseGroup(targets=targets, weight_mv=spec.w_inh_mv, delay_ticks=delay_inh),
            )
        synapse_count += exc_draws.size + inh_draws.size

    # Stimulus pulse packet: spikes wearing the previous layer's excitatory
    # keys, so the first layer sees it exactly like an arriving wave.
    stim = spec.stimulus
    gen = rngmod.stream(config.rng_seed, rngmod.STREAM_STIMULUS)
    prev = (stim.target_pe - 1) % n_layers
    stimulus: dict[int, list[tuple[int, int]]] = {}
    if stim.n_spikes:
        sources = gen.choice(exc, size=stim.n_spikes, replace=False)
        ticks = np.rint(
            gen.normal(stim.start_ms, stim.jitter_ms, stim.n_spikes) / t_sys_ms
        ).astype(int)
        ticks = np.clip(ticks, 0, None)
        for src, tick in sorted(zip(sources.tolist(), ticks.tolist()), key=lambda p: (p[1], p[0])):
            stimulus.setdefault(tick, []).append((stim.target_pe, spike_key(prev, False, src)))

    per_pe = synapse_count // n_layers
    return SynfireNetwork(
        spec=spec,
        pes=pes,
        table=table,
        stimulus=stimulus,
        synapses_per_pe=per_pe,
        total_synapses=synapse_count,
    )


class SynfireHooks(TickHooks):
    def __init__(self, net: SynfireNetwork, config: SimConfig):
        self.net = net
        width = config.topology.mesh_width
        attach = (config.router.attach_x, config.router.attach_y)
        self._route_cache: dict[int, tuple[tuple[int, ...], int]] = {}
        self._qpe = [(p // 4 % width, p // 4 // width) for p in range(config.topology.n_pes)]
        self._attach = attach

    def external_arrivals(self, tick: int):
        return self.net.stimulus.get(tick, [])

    def route_spike(self, src_pe: int, key: int) -> tuple[tuple[int, ...], int]:
        cached = self._route_cache.get(key)
        if cached is None:
            dests = tuple(
                sorted(d.index for d in self.net.table.lookup(key) if d.kind == DestKind.PE)
            )
            sx, sy = self._qpe[src_pe]
            ax, ay = self._attach
            hops = abs(sx - ax) + abs(sy - ay)
            for d in dests:
                dx, dy = self._qpe[d]
                hops += abs(ax - dx) + abs(ay - dy)
            cached = (dests, hops)
            self._route_cache[key] = cached
        return cached


def run_synfire(config: SimConfig, out_dir: str | None = None) -> SimReport:
    net = build_synfire(config)
    engine = SpikingEngine(config, net.pes, SynfireHooks(net, config), out_dir)
    report = engine.run()
    report.add("synapses_per_pe", net.synapses_per_pe, "synapses")
    report.add("avg_fan_out", net.avg_fan_out, "synapses/neuron")
    report.add("stimulus_spikes", config.benchmark.stimulus.n_spikes, "spikes")
    return report

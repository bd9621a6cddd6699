"""Simulation kernel: global 1 ms tick schedule, tracing, reports.

The engine is deliberately single-threaded and order-deterministic: within a
tick every PE is processed in id order, spikes sent during tick t become
visible to their targets in tick t+1, and all randomness flows through
counter-based per-entity streams.  Re-running a configuration with the same
seed therefore reproduces every output file byte for byte.

Time is two-level: functional behavior advances in 1 ms ticks, while each PE
accrues a clock-cycle count within the tick from which its processing time
t_sp is derived.  The NoC runs in its own fixed 400 MHz domain.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import rng as rngmod
from .config import IdleSpec, NefSpec, SimConfig, SynfireSpec, DnnSpec
from .energy import (
    EnergyLedger,
    PowerSummary,
    average_power_mw,
    energy_cycle,
)
from .noc import HOP_CYCLES
from .pe import PeModel, select_pl


@dataclass(frozen=True)
class ClockDomain:
    domain_id: str
    frequency_hz: float

    def validate(self) -> None:
        if self.frequency_hz <= 0:
            raise ValueError("frequency must be positive")

    def cycles_per_tick(self, t_sys_s: float = 1e-3) -> int:
        return int(round(self.frequency_hz * t_sys_s))


@dataclass(frozen=True)
class SimTime:
    tick: int
    cycle_offset: int = 0

    def validate(self, domain: ClockDomain | None = None, t_sys_s: float = 1e-3) -> None:
        if self.tick < 0 or self.cycle_offset < 0:
            raise ValueError("tick and cycle_offset must be >= 0")
        if domain is not None and self.cycle_offset >= domain.cycles_per_tick(t_sys_s):
            raise ValueError("cycle_offset beyond the tick length of this domain")

    def key(self) -> tuple[int, int]:
        return (self.tick, self.cycle_offset)


class TraceKind(Enum):
    SPIKE = "Spike"
    PL_CHANGE = "PlChange"
    PACKET_SENT = "PacketSent"
    PACKET_DELIVERED = "PacketDelivered"
    PACKET_DROPPED = "PacketDropped"
    ENERGY_SAMPLE = "EnergySample"
    MAC_JOB_DONE = "MacJobDone"


@dataclass(frozen=True)
class TraceEvent:
    time: SimTime
    kind: TraceKind
    source: str
    detail: str


TRACE_HEADER = "time_ms,cycle,kind,source,detail"


class TraceWriter:
    """Buffered CSV trace sink; rows flush once per tick.

    Enforces that every source emits events in nondecreasing time order,
    which is part of the trace contract.
    """

    def __init__(self, path: str | None):
        self._fh = open(path, "w", newline="") if path else None
        if self._fh:
            self._fh.write(TRACE_HEADER + "\n")
        self._buffer: list[str] = []
        self._last: dict[str, tuple[int, int]] = {}

    def emit(self, event: TraceEvent) -> None:
        key = event.time.key()
        last = self._last.get(event.source)
        if last is not None and key < last:
            raise AssertionError(
                f"trace went backwards for {event.source}: {last} -> {key}"
            )
        self._last[event.source] = key
        if self._fh:
            self._buffer.append(
                f"{event.time.tick},{event.time.cycle_offset},"
                f"{event.kind.value},{event.source},{event.detail}"
            )

    def end_tick(self) -> None:
        if self._fh and self._buffer:
            self._fh.write("\n".join(self._buffer) + "\n")
            self._buffer.clear()

    def close(self) -> None:
        if self._fh:
            self.end_tick()
            self._fh.close()
            self._fh = None


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class SimReport:
    """Named scalar results of one run; serializes to metric,value,unit CSV."""

    def __init__(self):
        self.rows: list[tuple[str, object, str]] = []
        self._index: dict[str, object] = {}
        self.power: PowerSummary | None = None

    def add(self, metric: str, value, unit: str = "") -> None:
        if metric in self._index:
            raise ValueError(f"duplicate report metric {metric}")
        self.rows.append((metric, value, unit))
        self._index[metric] = value

    def get(self, metric: str):
        return self._index[metric]

    def __contains__(self, metric: str) -> bool:
        return metric in self._index

    def save(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("metric,value,unit\n")
            for metric, value, unit in self.rows:
                fh.write(f"{metric},{_fmt(value)},{unit}\n")

    @staticmethod
    def load(path: str) -> "SimReport":
        report = SimReport()
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "metric,value,unit":
                raise ValueError(f"not a report file: {path}")
            for line in fh:
                metric, value, unit = line.rstrip("\n").split(",", 2)
                try:
                    parsed: object = int(value)
                except ValueError:
                    try:
                        parsed = float(value)
                    except ValueError:
                        parsed = value
                report.add(metric, parsed, unit)
        return report


def power_summary_from_report(report: SimReport) -> PowerSummary:
    return PowerSummary(
        n_pes=int(report.get("n_pes")),
        ticks=int(report.get("ticks")),
        baseline_per_pe=float(report.get("baseline_power_mW")),
        neuron_chip=float(report.get("neuron_power_chip_mW")),
        synapse_chip=float(report.get("synapse_power_chip_mW")),
        spikes_total=int(report.get("spikes_total")),
    )


class _CsvSink:
    """Minimal buffered CSV writer used for the auxiliary output files."""

    def __init__(self, path: str | None, header: str):
        self._fh = open(path, "w", newline="") if path else None
        if self._fh:
            self._fh.write(header + "\n")
        self._buffer: list[str] = []

    def row(self, line: str) -> None:
        if self._fh:
            self._buffer.append(line)

    def flush(self) -> None:
        if self._fh and self._buffer:
            self._fh.write("\n".join(self._buffer) + "\n")
            self._buffer.clear()

    def close(self) -> None:
        if self._fh:
            self.flush()
            self._fh.close()
            self._fh = None


class TickHooks:
    """Extension points the benchmark drivers plug into the engine."""

    forced_pl: int | None = None  # overrides the DVFS/mode decision

    def external_arrivals(self, tick: int) -> list[tuple[int, int]]:
        """(pe, key) spikes arriving from outside during this tick."""
        return []

    def inject_currents(self, tick: int, pe: int) -> np.ndarray | None:
        return None

    def on_result(self, tick: int, pe: int, result) -> None:
        pass

    def route_spike(self, src_pe: int, key: int) -> tuple[tuple[int, ...], int]:
        """Destination PEs and total QPE hops for one spike key."""
        return (), 0


class SpikingEngine:
    """Runs tick-driven benchmarks (synfire, idle, NEF via hooks)."""

    def __init__(
        self,
        config: SimConfig,
        pes: list[PeModel],
        hooks: TickHooks,
        out_dir: str | None = None,
    ):
        self.config = config
        self.pes = pes
        self.hooks = hooks
        self.out_dir = out_dir
        self.ledger = EnergyLedger()
        self.pl_hist = [0, 0, 0]  # ticks processed at PL1/2/3 across PEs
        self.spikes_total = 0
        self.realtime_violations = 0
        self.noc_packets = 0
        self.noc_deliveries = 0
        self.noc_hops = 0
        self.mode = config.mode

        def path(name: str) -> str | None:
            return f"{out_dir}/{name}" if out_dir else None

        flags = config.trace
        self.trace = TraceWriter(path("trace.csv"))
        self.raster = _CsvSink(path("raster.csv") if flags.raster else None, "time_ms,pe,neuron")
        self.pe_ticks = _CsvSink(
            path("pe_ticks.csv") if flags.pe_ticks else None,
            "tick,pe,pl,fifo_len,t_sp_us,spikes_out",
        )

    def run(self) -> SimReport:
        cfg = self.config
        mode = self.mode
        sleep = mode == "dvfs"
        forced = self.hooks.forced_pl
        if forced is None and mode == "pl3":
            forced = 3
        elif forced is None and mode == "pl1":
            forced = 1
        flags = cfg.trace
        for t in range(cfg.ticks):
            for pe in self.pes:
                pe.fifo.rotate()
            for pe_id, key in self.hooks.external_arrivals(t):
                self.pes[pe_id].fifo.push(key, t)
            for pe in self.pes:
                pl = forced if forced is not None else select_pl(len(pe.fifo), cfg.thresholds)
                inject = self.hooks.inject_currents(t, pe.pe_id)
                result = pe.tick(t, pl, inject)
                e = energy_cycle(
                    pl, result.t_sp_s, pe.n_neurons, result.n_syn, cfg.energy, sleep=sleep
                )
                self.ledger.add(e)
                self.ledger.ticks += 1
                self.pl_hist[pl - 1] += 1
                src = f"pe{pe.pe_id}"
                if result.realtime_violation:
                    self.realtime_violations += 1
                    self.trace.emit(TraceEvent(
                        SimTime(t, 0), TraceKind.ENERGY_SAMPLE, src,
                        f"realtime_violation t_sp_us={result.t_sp_s * 1e6:.3f}",
                    ))
                if flags.pl_changes and pl != 1 and sleep:
                    self.trace.emit(TraceEvent(SimTime(t, 0), TraceKind.PL_CHANGE, src, f"pl={pl}"))
                if flags.energy_samples:
                    self.trace.emit(TraceEvent(
                        SimTime(t, 0), TraceKind.ENERGY_SAMPLE, src,
                        f"total_j={e.total_j!r}",
                    ))
                n_fired = int(np.count_nonzero(result.fired)) if result.fired.size else 0
                if n_fired and (flags.raster or flags.spikes):
                    fired_ids = np.nonzero(result.fired)[0]
                    for nid in fired_ids:
                        if flags.spikes:
                            self.trace.emit(TraceEvent(
                                SimTime(t, 0), TraceKind.SPIKE, src, f"neuron={nid}",
                            ))
                        self.raster.row(f"{t},{pe.pe_id},{nid}")
                self.spikes_total += n_fired
                for key in result.spikes_out:
                    dests, hops = self.hooks.route_spike(pe.pe_id, key)
                    if dests:
                        self.noc_packets += 1
                        self.noc_hops += hops
                        self.ledger.noc_j += hops * cfg.energy.noc_hop_energy_j
                        for dest in dests:
                            self.pes[dest].fifo.push(key, t)
                            self.noc_deliveries += 1
                        if flags.packets:
                            self.trace.emit(TraceEvent(
                                SimTime(t, 0), TraceKind.PACKET_SENT, src,
                                f"key=0x{key:08X} dests={len(dests)} hops={hops}",
                            ))
                if flags.pl_changes and pl != 1 and sleep:
                    # dropped back to PL1 and slept after the listed cycles
                    self.trace.emit(TraceEvent(
                        SimTime(t, 0), TraceKind.PL_CHANGE, src,
                        f"pl=1 sleep after={cfg.budget.cycles(pe.n_neurons, result.n_syn)}cyc",
                    ))
                self.pe_ticks.row(
                    f"{t},{pe.pe_id},{pl},{result.fifo_len},"
                    f"{result.t_sp_s * 1e6:.3f},{n_fired}"
                )
                self.hooks.on_result(t, pe.pe_id, result)
            self.trace.end_tick()
            self.raster.flush()
            self.pe_ticks.flush()
        return self._finish()

    def _finish(self) -> SimReport:
        cfg = self.config
        self.trace.close()
        self.raster.close()
        self.pe_ticks.close()
        report = SimReport()
        n_pes = len(self.pes)
        ticks = cfg.ticks
        t_sys = cfg.energy.t_sys_s
        led = self.ledger
        report.add("ticks", ticks, "")
        report.add("n_pes", n_pes, "")
        report.add("mode", cfg.mode, "")
        report.add("seed", cfg.rng_seed, "")
        report.add("spikes_total", self.spikes_total, "spikes")
        report.add("syn_events_total", sum(p.syn_events_total for p in self.pes), "events")
        report.add("realtime_violations", self.realtime_violations, "ticks")
        report.add("fifo_overflow_drops", sum(p.fifo.overflow_drops for p in self.pes), "spikes")
        report.add("energy_total_J", led.total_j, "J")
        report.add("energy_baseline_J", led.baseline_j, "J")
        report.add("energy_neuron_J", led.neuron_j, "J")
        report.add("energy_synapse_J", led.synapse_j, "J")
        report.add("energy_noc_J", led.noc_j, "J")
        pe_ticks_total = max(1, ticks * n_pes)
        for i, count in enumerate(self.pl_hist, start=1):
            report.add(f"pl{i}_fraction", count / pe_ticks_total, "")
        divisor = max(1, ticks) * t_sys
        baseline_per_pe = led.baseline_j / divisor / max(1, n_pes) * 1e3
        neuron_chip = led.neuron_j / divisor * 1e3
        synapse_chip = led.synapse_j / divisor * 1e3
        report.add("baseline_power_mW", baseline_per_pe, "mW")
        report.add("neuron_power_mW", neuron_chip / max(1, n_pes), "mW")
        report.add("synapse_power_mW", synapse_chip / max(1, n_pes), "mW")
        report.add(
            "total_power_mW",
            average_power_mw(led.total_j, ticks, t_sys) / max(1, n_pes),
            "mW",
        )
        report.add("neuron_power_chip_mW", neuron_chip, "mW")
        report.add("synapse_power_chip_mW", synapse_chip, "mW")
        report.add("total_power_chip_mW", average_power_mw(led.total_j, ticks, t_sys), "mW")
        report.add("noc_packets", self.noc_packets, "packets")
        report.add("noc_deliveries", self.noc_deliveries, "packets")
        report.add("noc_hops", self.noc_hops, "hops")
        report.add("noc_hop_cycles", self.noc_hops * HOP_CYCLES, "cycles")
        component_sum = led.component_sum_j()
        if led.total_j:
            rel = abs(component_sum - led.total_j) / led.total_j
            if rel > 1e-9:
                raise AssertionError(f"energy components drifted from the total: {rel}")
        report.power = PowerSummary(
            n_pes=n_pes,
            ticks=ticks,
            baseline_per_pe=baseline_per_pe,
            neuron_chip=neuron_chip,
            synapse_chip=synapse_chip,
            spikes_total=self.spikes_total,
        )
        return report


def seeded_rng(seed: int, stream_id: int) -> np.random.Generator:
    """Deterministic, platform-stable stream for (seed, stream_id)."""
    return rngmod.stream(seed, stream_id)


def run_simulation(config: SimConfig, out_dir: str | None = None) -> SimReport:
    """Validate, dispatch to the benchmark driver, return the report."""
    config.validate()
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    bench = config.benchmark
    if isinstance(bench, SynfireSpec):
        from .benchmarks.synfire import run_synfire

        return run_synfire(config, out_dir)
    if isinstance(bench, NefSpec):
        from .benchmarks.nef import run_nef

        return run_nef(config, out_dir)
    if isinstance(bench, DnnSpec):
        from .benchmarks.dnn import run_dnn

        return run_dnn(config, out_dir)
    if isinstance(bench, IdleSpec):
        from .benchmarks.idle import run_idle

        return run_idle(config, out_dir)
    raise TypeError(f"no driver for benchmark {type(bench).__name__}")

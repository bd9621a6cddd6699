"""Per-tick PE energy accounting and DVFS-vs-fixed-PL power comparison.

The energy of one 1 ms simulation cycle on one PE splits into a baseline term
and per-event terms:

    E_cycle = P_BL(pl) * t_sp  +  P_BL(PL1) * (t_sys - t_sp)
              + e_neur(pl) * n_neur
              + e_syn(pl)  * n_syn

where t_sp is the time the PE actually spent processing before dropping back
to PL1 and sleeping.  In always-on mode (no sleep, fixed PL) the baseline is
simply P_BL(pl) * t_sys.  The default parameters are the values measured on
the 8-PE prototype for the three performance levels PL1 (0.5 V, 100 MHz),
PL2 (0.5 V, 200 MHz) and PL3 (0.6 V, 400 MHz).

Router and NoC energy is not part of the PE model; an optional per-hop energy
constant (default 0) is accounted and reported separately, never mixed into
the PE components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PerformanceLevel:
    """One DVFS operating point."""

    index: int  # 1-based
    vdd_v: float
    freq_hz: float


DEFAULT_PLS: tuple[PerformanceLevel, ...] = (
    PerformanceLevel(1, 0.5, 100e6),
    PerformanceLevel(2, 0.5, 200e6),
    PerformanceLevel(3, 0.6, 400e6),
)

NOC_FREQ_HZ = 400e6  # QPE router domain, fixed regardless of PE level


@dataclass(frozen=True)
class EnergyParams:
    """Measured model parameters, indexed PL1..PL3."""

    p_bl_mw: tuple[float, float, float] = (22.38, 29.72, 66.44)
    e_neur_nj: tuple[float, float, float] = (1.51, 1.50, 1.89)
    e_syn_nj: tuple[float, float, float] = (0.20, 0.20, 0.26)
    t_sys_s: float = 1e-3
    noc_hop_energy_j: float = 0.0

    def validate(self) -> None:
        for name in ("p_bl_mw", "e_neur_nj", "e_syn_nj"):
            values = getattr(self, name)
            if len(values) != 3 or any(v <= 0 for v in values):
                raise ValueError(f"{name} needs three positive values, got {values}")
        if self.t_sys_s <= 0:
            raise ValueError("t_sys_s must be positive")
        if self.noc_hop_energy_j < 0:
            raise ValueError("noc_hop_energy_j must be >= 0")

    def p_bl_w(self, pl: int) -> float:
        return self.p_bl_mw[pl - 1] * 1e-3

    def e_neur_j(self, pl: int) -> float:
        return self.e_neur_nj[pl - 1] * 1e-9

    def e_syn_j(self, pl: int) -> float:
        return self.e_syn_nj[pl - 1] * 1e-9


@dataclass
class TickEnergy:
    """Componentized energy of one simulation cycle on one PE."""

    pl_used: int
    t_sp_s: float
    baseline_j: float
    neuron_j: float
    synapse_j: float
    clamped: bool = False  # t_sp exceeded t_sys and was clamped

    @property
    def total_j(self) -> float:
        return self.baseline_j + self.neuron_j + self.synapse_j


def energy_cycle(
    pl: int,
    t_sp_s: float,
    n_neur: int,
    n_syn: int,
    params: EnergyParams,
    sleep: bool = True,
) -> TickEnergy:
    """Energy of one tick at performance level ``pl``.

    ``sleep=True`` models the normal DVFS schedule (drop to PL1 and sleep once
    processing is done); ``sleep=False`` models an always-on PE that idles at
    ``pl`` for the whole tick, which is how the fixed-PL reference modes are
    defined.  t_sp above t_sys is clamped and flagged, mirroring the engine's
    real-time violation handling.
    """
    if pl not in (1, 2, 3):
        raise ValueError(f"performance level must be 1..3, got {pl}")
    if t_sp_s < 0:
        raise ValueError("t_sp must be >= 0")
    if n_neur < 0 or n_syn < 0:
        raise ValueError("event counts must be >= 0")
    clamped = t_sp_s > params.t_sys_s
    t_sp = min(t_sp_s, params.t_sys_s)
    if sleep:
        baseline = params.p_bl_w(pl) * t_sp + params.p_bl_w(1) * (params.t_sys_s - t_sp)
    else:
        baseline = params.p_bl_w(pl) * params.t_sys_s
    return TickEnergy(
        pl_used=pl,
        t_sp_s=t_sp,
        baseline_j=baseline,
        neuron_j=params.e_neur_j(pl) * n_neur,
        synapse_j=params.e_syn_j(pl) * n_syn,
        clamped=clamped,
    )


@dataclass
class EnergyLedger:
    """Running per-component energy totals for one simulation run."""

    ticks: int = 0
    baseline_j: float = 0.0
    neuron_j: float = 0.0
    synapse_j: float = 0.0
    total_j: float = 0.0  # accumulated independently of the components
    noc_j: float = 0.0  # reported separately, never part of total_j
    clamped_ticks: int = 0

    def add(self, e: TickEnergy) -> None:
        self.baseline_j += e.baseline_j
        self.neuron_j += e.neuron_j
        self.synapse_j += e.synapse_j
        self.total_j += e.total_j
        if e.clamped:
            self.clamped_ticks += 1

    def component_sum_j(self) -> float:
        return self.baseline_j + self.neuron_j + self.synapse_j


def average_power_mw(energy_j: float, ticks: int, t_sys_s: float) -> float:
    if ticks == 0:
        return 0.0
    return energy_j / (ticks * t_sys_s) * 1e3


@dataclass
class PowerSummary:
    """Average powers of one run, in mW.

    ``per_pe`` values are averaged over PEs; ``chip`` values are summed over
    the PEs of the run.  The published comparison table for the 8-PE
    prototype quotes the baseline per PE but the neuron/synapse rows as chip
    totals (2000 neurons), so both views are kept.
    """

    n_pes: int
    ticks: int
    baseline_per_pe: float
    neuron_chip: float
    synapse_chip: float
    spikes_total: int

    @property
    def neuron_per_pe(self) -> float:
        return self.neuron_chip / self.n_pes

    @property
    def synapse_per_pe(self) -> float:
        return self.synapse_chip / self.n_pes

    @property
    def total_per_pe(self) -> float:
        return self.baseline_per_pe + self.neuron_per_pe + self.synapse_per_pe

    @property
    def total_table(self) -> float:
        """Mixed-convention total used by the published comparison table."""
        return self.baseline_per_pe + self.neuron_chip + self.synapse_chip


@dataclass
class ComparisonRow:
    component: str
    only_pl3_mw: float
    dvfs_mw: float

    @property
    def reduction_pct(self) -> float:
        if self.only_pl3_mw == 0:
            return 0.0
        return (1.0 - self.dvfs_mw / self.only_pl3_mw) * 100.0


def compare_dvfs(dvfs: PowerSummary, pl3: PowerSummary) -> list[ComparisonRow]:
    """Component-wise power reduction of DVFS relative to the fixed-PL3 run.

    Both runs must cover the same horizon and have produced the same spike
    trace (the performance level never changes functional behavior, so equal
    seeds give equal spike totals; anything else means the runs are not
    comparable).
    """
    if dvfs.ticks != pl3.ticks or dvfs.n_pes != pl3.n_pes:
        raise ValueError("runs cover different horizons; comparison rejected")
    if dvfs.spikes_total != pl3.spikes_total:
        raise ValueError("runs produced different spike traces; comparison rejected")
    return [
        ComparisonRow("baseline", pl3.baseline_per_pe, dvfs.baseline_per_pe),
        ComparisonRow("neuron", pl3.neuron_chip, dvfs.neuron_chip),
        ComparisonRow("synapse", pl3.synapse_chip, dvfs.synapse_chip),
        ComparisonRow("total", pl3.total_table, dvfs.total_table),
    ]


def nef_synop_energy_pj(
    dynamic_energy_j: float,
    n_neurons: int,
    dims: int,
    m_spikes: int,
    mode: str,
) -> float:
    """Energy per synaptic operation, in pJ.

    ``mode='hardware'`` divides by the operations actually performed for the
    factorized connection (N*D multiply-accumulates plus D adds per spike);
    ``mode='equivalent'`` divides by the synaptic events an unfactorized
    all-to-all connection would have seen (each spike touching all N
    neurons).  A zero denominator yields NaN so callers can flag it.
    """
    if n_neurons <= 0 or dims <= 0 or m_spikes < 0:
        raise ValueError("counts must be positive (m_spikes >= 0)")
    if mode == "hardware":
        denom = n_neurons * dims + m_spikes * dims
    elif mode == "equivalent":
        denom = m_spikes * n_neurons
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if denom == 0:
        return math.nan
    return dynamic_energy_j / denom * 1e12

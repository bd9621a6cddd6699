"""Processing-element behavioral model.

One PE simulates a block of leaky integrate-and-fire neurons in 1 ms ticks.
Spikes arriving over the NoC land in a FIFO and are processed in the *next*
tick: the PE wakes on the timer tick, picks its performance level from the
number of FIFO entries, walks the synapse lists of every queued spike
(depositing weights into a future-input ring buffer according to the synaptic
delay), updates all neurons, sends the resulting spikes, then drops back to
PL1 and sleeps.

The time spent processing, t_sp, is derived from a cycle budget

    cycles = tick_overhead + n_neur * per_neuron + n_syn * per_syn_event

divided by the clock of the level the tick ran at.  t_sp above the 1 ms tick
length is a real-time violation: it is flagged and the simulation continues.

The membrane update is the exact-exponential form

    v <- v_rest + (v - v_rest) * exp(-dt/tau_m) + R*I * (1 - exp(-dt/tau_m))

with synaptic weights and noise added directly in membrane-potential units
(R = 1 by default).  A neuron fires when v >= v_th, resets, and holds at
v_reset through the refractory ticks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DvfsThresholds:
    """FIFO spike counts above which the level is raised (strict compare)."""

    l_th1: int = 17
    l_th2: int = 59

    def validate(self) -> None:
        if not 0 <= self.l_th1 < self.l_th2:
            raise ValueError(f"need 0 <= l_th1 < l_th2, got {self.l_th1}, {self.l_th2}")


def select_pl(fifo_len: int, th: DvfsThresholds) -> int:
    """Performance level for a tick, from the FIFO count at tick start."""
    if fifo_len > th.l_th2:
        return 3
    if fifo_len > th.l_th1:
        return 2
    return 1


@dataclass(frozen=True)
class CycleBudget:
    """Converts per-tick work counts into clock cycles."""

    tick_overhead: int = 2000
    per_neuron: int = 400
    per_syn_event: int = 40

    def validate(self) -> None:
        if min(self.tick_overhead, self.per_neuron, self.per_syn_event) < 1:
            raise ValueError("cycle budget entries must be >= 1")

    def cycles(self, n_neur: int, n_syn: int) -> int:
        return self.tick_overhead + n_neur * self.per_neuron + n_syn * self.per_syn_event


@dataclass(frozen=True)
class LifParams:
    tau_m_ms: float = 10.0
    v_rest_mv: float = -65.0
    v_th_mv: float = -50.0
    v_reset_mv: float = -65.0
    t_ref_ms: float = 2.0
    r_m: float = 1.0  # input current expressed in mV-equivalent units
    noise_mu_mv: float = 0.0
    noise_sigma_mv: float = 0.0

    def validate(self) -> None:
        if self.tau_m_ms <= 0 or self.t_ref_ms < 0:
            raise ValueError("tau_m must be positive and t_ref >= 0")
        if self.v_th_mv <= self.v_reset_mv:
            raise ValueError("v_th must lie above v_reset")
        if self.noise_sigma_mv < 0:
            raise ValueError("noise sigma must be >= 0")

    def decay(self, dt_ms: float = 1.0) -> float:
        return math.exp(-dt_ms / self.tau_m_ms)

    def refractory_ticks(self, dt_ms: float = 1.0) -> int:
        return int(round(self.t_ref_ms / dt_ms))


@dataclass
class NeuronState:
    """Scalar neuron view, used by builders and single-neuron tests."""

    v_mv: float
    refractory_remaining: int = 0
    is_excitatory: bool = True


def lif_step(
    state: NeuronState, input_mv: float, params: LifParams, dt_ms: float = 1.0
) -> tuple[NeuronState, bool]:
    """Advance one neuron by one tick; returns (new state, fired)."""
    pool = NeuronPool(1, params)
    pool.v[0] = state.v_mv
    pool.refrac[0] = state.refractory_remaining
    fired = pool.step(np.array([input_mv]))
    new = NeuronState(
        v_mv=float(pool.v[0]),
        refractory_remaining=int(pool.refrac[0]),
        is_excitatory=state.is_excitatory,
    )
    return new, bool(fired[0])


class NeuronPool:
    """Vectorized LIF state for all neurons of one PE."""

    def __init__(self, n: int, params: LifParams, dt_ms: float = 1.0):
        params.validate()
        self.n = n
        self.params = params
        self.dt_ms = dt_ms
        self.decay = params.decay(dt_ms)
        self.ref_ticks = params.refractory_ticks(dt_ms)
        self.v = np.full(n, params.v_rest_mv, dtype=np.float64)
        self.refrac = np.zeros(n, dtype=np.int64)

    def step(self, input_mv: np.ndarray) -> np.ndarray:
        """One tick for the whole pool; returns the boolean fired mask.

        ``input_mv`` is the summed synaptic deposit for this tick plus any
        externally injected drive, in membrane units.
        """
        p = self.params
        in_ref = self.refrac > 0
        v = p.v_rest_mv + (self.v - p.v_rest_mv) * self.decay + input_mv
        v[in_ref] = p.v_reset_mv
        fired = v >= p.v_th_mv
        fired &= ~in_ref
        v[fired] = p.v_reset_mv
        self.refrac[in_ref] -= 1
        self.refrac[fired] = self.ref_ticks
        self.v = v
        return fired

    def inject_current_step(self, current_mv: np.ndarray, extra_mv: np.ndarray | None = None) -> np.ndarray:
        """Tick driven by a sustained current (exact-exponential charging)."""
        drive = self.params.r_m * current_mv * (1.0 - self.decay)
        if extra_mv is not None:
            drive = drive + extra_mv
        return self.step(drive)


class SpikeFifo:
    """Arrival queue: spikes received in tick t are processed in tick t+1."""

    def __init__(self, capacity: int = 4096):
        self.capacity = capacity
        self.current: list[tuple[int, int]] = []  # (key, arrival tick), drained this tick
        self.staging: list[tuple[int, int]] = []  # arrivals during the current tick
        self.overflow_drops = 0

    def push(self, key: int, tick: int) -> bool:
        if len(self.staging) >= self.capacity:
            self.overflow_drops += 1
            return False
        self.staging.append((key, tick))
        return True

    def rotate(self) -> None:
        """Expose this tick's arrivals for processing in the next tick."""
        self.current = self.staging
        self.staging = []

    def __len__(self) -> int:
        return len(self.current)


@dataclass
class SynapseGroup:
    """Fan-out of one presynaptic source into this PE."""

    targets: np.ndarray  # neuron indices
    weight_mv: float
    delay_ticks: int

    def __post_init__(self) -> None:
        if self.delay_ticks < 1:
            raise ValueError("synaptic delays must be >= 1 tick")


@dataclass
class TickResult:
    pl: int
    fifo_len: int
    n_syn: int
    t_sp_s: float
    fired: np.ndarray
    spikes_out: list[int]  # keys of spikes sent this tick
    realtime_violation: bool


class PeModel:
    """One PE: neuron pool, spike FIFO, synapse map, DVFS bookkeeping."""

    def __init__(
        self,
        pe_id: int,
        n_neurons: int,
        params: LifParams,
        budget: CycleBudget,
        thresholds: DvfsThresholds,
        pl_freqs_hz: tuple[float, float, float],
        noise_rng: np.random.Generator | None = None,
        spike_keys: np.ndarray | None = None,
        max_delay_ticks: int = 16,
        t_sys_s: float = 1e-3,
        fifo_capacity: int = 4096,
    ):
        budget.validate()
        thresholds.validate()
        self.pe_id = pe_id
        self.n_neurons = n_neurons
        self.pool = NeuronPool(max(n_neurons, 1), params) if n_neurons else None
        self.budget = budget
        self.thresholds = thresholds
        self.pl_freqs_hz = pl_freqs_hz
        self.noise_rng = noise_rng
        self.fifo = SpikeFifo(fifo_capacity)
        self.synapses: dict[int, SynapseGroup] = {}
        self.spike_keys = spike_keys  # key emitted per neuron index
        self.t_sys_s = t_sys_s
        self.ring_len = max_delay_ticks + 1
        self.ring = np.zeros((self.ring_len, max(n_neurons, 1)), dtype=np.float64)
        self.syn_events_total = 0
        self.spikes_out_total = 0

    def add_synapse_group(self, source_key: int, group: SynapseGroup) -> None:
        if group.delay_ticks >= self.ring_len:
            raise ValueError("delay exceeds the ring buffer horizon")
        if source_key in self.synapses:
            raise ValueError(f"duplicate synapse group for key {source_key:#x}")
        self.synapses[source_key] = group

    def tick(
        self,
        tick: int,
        pl: int,
        inject_mv: np.ndarray | None = None,
    ) -> TickResult:
        """Process one timer tick at performance level ``pl``."""
        fifo_len = len(self.fifo)
        n_syn = 0
        for key, arr_tick in self.fifo.current:
            group = self.synapses.get(key)
            if group is None:
                continue
            n_syn += len(group.targets)
            slot = (arr_tick + group.delay_ticks) % self.ring_len
            np.add.at(self.ring[slot], group.targets, group.weight_mv)
        self.fifo.current = []

        spikes_out: list[int] = []
        fired_mask = _EMPTY_MASK
        if self.n_neurons:
            slot = tick % self.ring_len
            drive = self.ring[slot].copy()
            self.ring[slot] = 0.0
            if inject_mv is not None:
                drive += inject_mv
            p = self.pool.params
            if self.noise_rng is not None and (p.noise_sigma_mv > 0 or p.noise_mu_mv != 0):
                drive += self.noise_rng.normal(
                    p.noise_mu_mv, p.noise_sigma_mv, self.n_neurons
                )
            fired_mask = self.pool.step(drive)
            if self.spike_keys is not None:
                spikes_out = [int(k) for k in self.spike_keys[fired_mask]]

        t_sp_s = self.budget.cycles(self.n_neurons, n_syn) / self.pl_freqs_hz[pl - 1]
        self.syn_events_total += n_syn
        self.spikes_out_total += len(spikes_out)
        return TickResult(
            pl=pl,
            fifo_len=fifo_len,
            n_syn=n_syn,
            t_sp_s=t_sp_s,
            fired=fired_mask,
            spikes_out=spikes_out,
            realtime_violation=t_sp_s > self.t_sys_s,
        )


_EMPTY_MASK = np.zeros(0, dtype=bool)


# ---------------------------------------------------------------------------
# Fixed-point exp/log accelerator stubs (s16.15 format)

FIXED_FRAC_BITS = 15
FIXED_SCALE = 1 << FIXED_FRAC_BITS
FIXED_MAX = 2**31 - 1
FIXED_MIN = -(2**31)
EXP_LOG_CYCLES = 4  # charged per call when the budget tracks accelerator use


@dataclass(frozen=True)
class FixedResult:
    raw: int  # s16.15
    flag: bool  # saturation or domain error

    @property
    def value(self) -> float:
        return self.raw / FIXED_SCALE


def to_fixed(x: float) -> int:
    raw = int(math.floor(x * FIXED_SCALE + 0.5))
    if raw > FIXED_MAX or raw < FIXED_MIN:
        raise ValueError(f"{x} is outside the s16.15 range")
    return raw


def exp_fixed(x_raw: int) -> FixedResult:
    """Correctly rounded exp() at s16.15 precision, saturating on overflow."""
    x = x_raw / FIXED_SCALE
    y = math.exp(x)
    raw = int(math.floor(y * FIXED_SCALE + 0.5))
    if raw > FIXED_MAX:
        return FixedResult(FIXED_MAX, True)
    return FixedResult(raw, False)


def log_fixed(x_raw: int) -> FixedResult:
    """Correctly rounded natural log; non-positive inputs flag a domain error."""
    if x_raw <= 0:
        return FixedResult(FIXED_MIN, True)
    y = math.log(x_raw / FIXED_SCALE)
    raw = int(math.floor(y * FIXED_SCALE + 0.5))
    if raw < FIXED_MIN:
        return FixedResult(FIXED_MIN, True)
    return FixedResult(raw, False)

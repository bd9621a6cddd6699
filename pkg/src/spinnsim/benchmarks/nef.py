"""NEF communication-channel benchmark: encode on the MAC array, spike, decode.

A population of LIF neurons represents a D-dimensional value.  Per tick:

  encode   input currents J_i = alpha_i * (e_i . x) + b_i, evaluated as an
           8-bit offset-binary matrix multiply on the MAC model and
           dequantized before the neuron update;
  update   the shared exact-exponential LIF step;
  decode   event-based: the decoders of the neurons that spiked are summed
           and low-pass filtered into the running estimate.

Decoders are solved offline by regularized least squares over the neurons'
discrete-time tuning curves, which have a closed form: with sustained drive
J the membrane needs k = ceil(ln(1 - theta/(R J)) / ln lambda) integration
ticks to reach threshold (theta = v_th - v_rest, lambda the per-tick decay),
so the rate is 1 / ((k + t_ref) * dt).

Synaptic-operation counters follow the two conventions used for factorized
connections: 'hardware' counts the N*D encode multiply-accumulates plus D
adds per emitted spike; 'equivalent' counts the all-to-all events an
unfactorized N x N connection would have seen (N per spike).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import rng as rngmod
from ..config import NefSpec, SimConfig
from ..kernel import SimReport, SimTime, SpikingEngine, TickHooks, TraceEvent, TraceKind
from ..mac import mm_execute
from ..pe import LifParams, PeModel


def discrete_lif_rate_hz(
    j_drive: np.ndarray, params: LifParams, dt_ms: float = 1.0
) -> np.ndarray:
    """Firing rate of the discrete-time LIF under sustained drive ``j_drive``."""
    theta = params.v_th_mv - params.v_rest_mv
    lam = params.decay(dt_ms)
    ref = params.refractory_ticks(dt_ms)
    j = np.asarray(j_drive, dtype=np.float64) * params.r_m
    rates = np.zeros_like(j)
    active = j > theta
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.ceil(np.log1p(-theta / j[active]) / np.log(lam))
    k = np.maximum(k, 1.0)
    rates[active] = 1000.0 / dt_ms / (k + ref)
    return rates


def drive_for_rate_hz(rate_hz: float, params: LifParams, dt_ms: float = 1.0) -> float:
    """Continuous-relaxation inverse of the rate function (for gain solving).

    The result is nudged infinitesimally upward so that integer-tick targets
    do not land exactly on a threshold-crossing boundary, where floating
    point could push the discrete neuron to the next-longer interval.
    """
    theta = params.v_th_mv - params.v_rest_mv
    lam = params.decay(dt_ms)
    ref = params.refractory_ticks(dt_ms)
    k_c = 1000.0 / dt_ms / rate_hz - ref
    if k_c < 1.0:
        raise ValueError(
            f"rate {rate_hz} Hz is unreachable: needs at least one integration "
            f"tick on top of the {ref}-tick refractory"
        )
    return theta / (params.r_m * (1.0 - lam**k_c)) * (1.0 + 1e-9)


@dataclass
class NefBuild:
    spec: NefSpec
    encoders: np.ndarray  # (N, D) unit rows
    gains: np.ndarray  # (N,)
    biases: np.ndarray  # (N,)
    decoders: np.ndarray  # (N, D)
    # offset-binary quantization of the encode matrix alpha_i * e_i
    aq: np.ndarray  # (N, D) uint8 view as int64
    a_scale: float
    x_scale: float
    rate_rmse: float  # rate-based reconstruction error of the solved decoders


def build_nef(config: SimConfig) -> NefBuild:
    spec = config.benchmark
    assert isinstance(spec, NefSpec)
    spec.validate()
    n, d = spec.n_neurons, spec.dimensions
    gen = rngmod.stream(config.rng_seed, rngmod.STREAM_NEF_BUILD)

    if d == 1:
        encoders = gen.choice([-1.0, 1.0], size=(n, 1))
    else:
        encoders = gen.normal(size=(n, d))
        encoders /= np.linalg.norm(encoders, axis=1, keepdims=True)
    intercepts = gen.uniform(spec.intercepts[0], spec.intercepts[1], n)
    max_rates = gen.uniform(spec.max_rate_hz[0], spec.max_rate_hz[1], n)

    theta = config.neuron.v_th_mv - config.neuron.v_rest_mv
    j_th = theta / config.neuron.r_m
    j_max = np.array([drive_for_rate_hz(r, config.neuron) for r in max_rates])
    gains = (j_max - j_th) / (1.0 - intercepts)
    biases = j_max - gains

    # tuning curves over sampled evaluation points
    if d == 1:
        eval_pts = np.linspace(-1.0, 1.0, 501).reshape(-1, 1)
    else:
        raw = gen.normal(size=(max(500, 200 * d), d))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        radii = gen.uniform(0.0, 1.0, len(raw)) ** (1.0 / d)
        eval_pts = raw * radii[:, None]
    currents = eval_pts @ encoders.T * gains + biases  # (S, N)
    activities = discrete_lif_rate_hz(currents, config.neuron)
    if activities.max() <= 0:
        raise ValueError("decoder solve failed: the population never fires")

    # ridge regression against the represented value
    sigma = spec.decoder_reg * activities.max()
    s = len(eval_pts)
    gram = activities.T @ activities + s * sigma**2 * np.eye(n)
    decoders = np.linalg.solve(gram, activities.T @ eval_pts)
    if not np.linalg.norm(decoders):
        raise ValueError("decoder solve produced an all-zero decoder")
    recon = activities @ decoders
    rate_rmse = float(np.sqrt(np.mean((recon - eval_pts) ** 2)))

    a = gains[:, None] * encoders
    a_max = float(np.max(np.abs(a))) or 1.0
    a_scale = a_max / 127.0
    aq = np.clip(np.rint(a / a_scale) + 128, 0, 255).astype(np.int64)
    return NefBuild(
        spec=spec,
        encoders=encoders,
        gains=gains,
        biases=biases,
        decoders=decoders,
        aq=aq,
        a_scale=a_scale,
        x_scale=1.0 / 127.0,
        rate_rmse=rate_rmse,
    )


def encode_currents(build: NefBuild, x: np.ndarray) -> tuple[np.ndarray, int]:
    """Quantized MAC encode of one input vector; returns (J, mac cycles)."""
    xq = np.clip(np.rint(np.asarray(x) / build.x_scale) + 128, 0, 255).astype(np.int64)
    raw, timing = mm_execute(build.aq, xq.reshape(-1, 1))
    d = len(xq)
    corr = (
        raw[:, 0]
        - 128 * build.aq.sum(axis=1)
        - 128 * int(xq.sum())
        + d * 128 * 128
    )
    j = build.a_scale * build.x_scale * corr + build.biases
    return j, timing.cycles


@dataclass
class NefRun:
    inputs: list = field(default_factory=list)
    decoded: list = field(default_factory=list)
    m_spikes: list = field(default_factory=list)
    synops_hw: int = 0
    synops_equiv: int = 0
    dynamic_energy_j: float = 0.0
    mac_cycles: int = 0


class NefHooks(TickHooks):
    def __init__(self, build: NefBuild, config: SimConfig):
        self.build = build
        self.config = config
        self.forced_pl = build.spec.pl
        self.run = NefRun()
        self._decay = config.neuron.decay(config.energy.t_sys_s * 1e3)
        self._beta = float(np.exp(-config.energy.t_sys_s * 1e3 / build.spec.tau_syn_ms))
        self._xhat = np.zeros(build.spec.dimensions)
        self._x = np.zeros(build.spec.dimensions)
        self._pending_mac_cycles = 0
        self.engine: SpikingEngine | None = None

    def input_at(self, tick: int) -> np.ndarray:
        sig = self.build.spec.input
        t = min(tick / max(1, sig.duration_ms - 1), 1.0)
        return np.full(self.build.spec.dimensions, sig.start + (sig.end - sig.start) * t)

    def inject_currents(self, tick: int, pe: int) -> np.ndarray:
        self._x = self.input_at(tick)
        j, cycles = encode_currents(self.build, self._x)
        self.run.mac_cycles += cycles
        self._pending_mac_cycles = cycles
        # sustained current -> per-tick exact-exponential drive
        return self.config.neuron.r_m * j * (1.0 - self._decay)

    def on_result(self, tick: int, pe: int, result) -> None:
        # the array finishes well inside the tick and raises its interrupt
        if self.engine is not None:
            self.engine.trace.emit(TraceEvent(
                SimTime(tick, self._pending_mac_cycles), TraceKind.MAC_JOB_DONE,
                f"pe{pe}", f"mode=mm cycles={self._pending_mac_cycles}",
            ))
        spec = self.build.spec
        n, d = spec.n_neurons, spec.dimensions
        fired = result.fired
        m = int(np.count_nonzero(fired))
        dt_s = self.config.energy.t_sys_s
        spike_sum = (
            self.build.decoders[fired].sum(axis=0) if m else np.zeros(d)
        )
        self._xhat = self._beta * self._xhat + (1.0 - self._beta) * (spike_sum / dt_s)
        r = self.run
        r.inputs.append(self._x.copy())
        r.decoded.append(self._xhat.copy())
        r.m_spikes.append(m)
        r.synops_hw += n * d + m * d
        r.synops_equiv += m * n
        r.dynamic_energy_j += (
            spec.e_mac_pj * 1e-12 * n * d
            + spec.e_add_pj * 1e-12 * m * d
            + spec.e_neuron_update_nj * 1e-9 * n
        )


def run_nef(config: SimConfig, out_dir: str | None = None) -> SimReport:
    build = build_nef(config)
    spec = build.spec
    pe = PeModel(
        pe_id=0,
        n_neurons=spec.n_neurons,
        params=config.neuron,
        budget=config.budget,
        thresholds=config.thresholds,
        pl_freqs_hz=config.pl_freqs_hz,
        noise_rng=rngmod.pe_noise_stream(config.rng_seed, 0),
        t_sys_s=config.energy.t_sys_s,
        fifo_capacity=config.fifo_capacity,
    )
    hooks = NefHooks(build, config)
    engine = SpikingEngine(config, [pe], hooks, out_dir)
    hooks.engine = engine
    report = engine.run()

    r = hooks.run
    inputs = np.array(r.inputs) if r.inputs else np.zeros((0, spec.dimensions))
    decoded = np.array(r.decoded) if r.decoded else np.zeros((0, spec.dimensions))
    burn_in = min(100, len(inputs))
    if len(inputs) > burn_in:
        err = decoded[burn_in:] - inputs[burn_in:]
        rmse = float(np.sqrt(np.mean(np.sum(err**2, axis=1) / spec.dimensions)))
    else:
        rmse = 0.0
    ticks = max(1, config.ticks)
    report.add("nef_rmse", rmse, "")
    report.add("nef_rate_solve_rmse", build.rate_rmse, "")
    report.add("synops_hardware", r.synops_hw, "ops")
    report.add("synops_equivalent", r.synops_equiv, "ops")
    report.add("nef_dynamic_energy_J", r.dynamic_energy_j, "J")
    m_total = int(np.sum(r.m_spikes)) if r.m_spikes else 0
    report.add(
        "energy_per_synop_hw_pJ",
        r.dynamic_energy_j / r.synops_hw * 1e12 if r.synops_hw else 0.0,
        "pJ",
    )
    report.add(
        "energy_per_synop_equiv_pJ",
        r.dynamic_energy_j / r.synops_equiv * 1e12 if r.synops_equiv else 0.0,
        "pJ",
    )
    report.add("mean_rate_hz", m_total / (ticks * config.energy.t_sys_s) / spec.n_neurons, "Hz")
    report.add("mac_cycles_total", r.mac_cycles, "cycles")

    if out_dir:
        with open(f"{out_dir}/nef_trace.csv", "w", newline="") as fh:
            fh.write("time_ms,input,decoded\n")
            for t in range(len(inputs)):
                fh.write(f"{t},{float(inputs[t][0])!r},{float(decoded[t][0])!r}\n")
    return report

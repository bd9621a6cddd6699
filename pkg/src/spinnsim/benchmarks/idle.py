"""Idle benchmark: PEs waking on the timer tick and doing nothing.

Useful for exercising the bare tick schedule and the baseline term of the
energy model without any network structure.
"""

from __future__ import annotations

from ..config import IdleSpec, SimConfig
from ..kernel import SimReport, SpikingEngine, TickHooks
from ..pe import PeModel
from .. import rng as rngmod


def run_idle(config: SimConfig, out_dir: str | None = None) -> SimReport:
    spec = config.benchmark
    assert isinstance(spec, IdleSpec)
    pes = [
        PeModel(
            pe_id=i,
            n_neurons=spec.n_neurons,
            params=config.neuron,
            budget=config.budget,
            thresholds=config.thresholds,
            pl_freqs_hz=config.pl_freqs_hz,
            noise_rng=rngmod.pe_noise_stream(config.rng_seed, i),
            t_sys_s=config.energy.t_sys_s,
            fifo_capacity=config.fifo_capacity,
        )
        for i in range(spec.n_pes)
    ]
    engine = SpikingEngine(config, pes, TickHooks(), out_dir)
    return engine.run()

"""DNN layer benchmark: MAC-array execution versus a scalar software baseline.

Individual layer slices from LeNet, VGG-16, ResNet-50 and MobileNetV2 are
sized to fit the 128 kB per-PE SRAM (operands plus 32-bit outputs) and run
on the MAC timing model.  The software reference is a documented cost model,
not a measurement: an optimized scalar 8-bit kernel on the embedded core is
charged ``scalar_cycles_per_mac`` per multiply-accumulate plus
``scalar_cycles_per_output`` of loop bookkeeping per output element.  The
speedup of a layer is the ratio of those cycle counts at equal clock.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng as rngmod
from ..config import DnnLayerSpec, DnnSpec, SimConfig
from ..kernel import SimReport
from ..mac import MacTiming, conv_execute, mm_execute, peak_ops_per_s


@dataclass
class LayerResult:
    spec: DnnLayerSpec
    output: np.ndarray
    timing: MacTiming
    accel_cycles: int
    scalar_cycles: float
    gops: float

    @property
    def speedup(self) -> float:
        return self.scalar_cycles / self.accel_cycles

    @property
    def utilization(self) -> float:
        return self.timing.utilization


def layer_data(layer: DnnLayerSpec, seed: int, index: int) -> tuple[np.ndarray, np.ndarray]:
    gen = rngmod.stream(seed, rngmod.STREAM_DNN_DATA + index)
    if layer.mode == "mm":
        a = gen.integers(0, 256, size=(layer.m, layer.k), dtype=np.uint8)
        b = gen.integers(0, 256, size=(layer.k, layer.n), dtype=np.uint8)
    else:
        a = gen.integers(0, 256, size=(layer.h, layer.w, layer.c), dtype=np.uint8)
        b = gen.integers(0, 256, size=(layer.r, layer.s, layer.c, layer.f), dtype=np.uint8)
    return a, b


def scalar_baseline_cycles(spec: DnnSpec, macs: int, outputs: int) -> float:
    return spec.scalar_cycles_per_mac * macs + spec.scalar_cycles_per_output * outputs


def run_layer(layer: DnnLayerSpec, bench: DnnSpec, seed: int, index: int) -> LayerResult:
    layer.validate()
    a, b = layer_data(layer, seed, index)
    if layer.mode == "mm":
        out, timing = mm_execute(a, b)
    else:
        out, timing = conv_execute(a, b, stride=layer.stride, pad=layer.pad)
    accel_cycles = timing.cycles
    if bench.transfer_penalty:
        accel_cycles = int(round(accel_cycles * 1.56))
    scalar = scalar_baseline_cycles(bench, timing.macs, out.size)
    freq = (100e6, 200e6, 400e6)[bench.pl - 1]
    gops = 2.0 * timing.macs / (accel_cycles / freq) / 1e9
    return LayerResult(
        spec=layer,
        output=out,
        timing=timing,
        accel_cycles=accel_cycles,
        scalar_cycles=scalar,
        gops=gops,
    )


def run_dnn(config: SimConfig, out_dir: str | None = None) -> SimReport:
    bench = config.benchmark
    assert isinstance(bench, DnnSpec)
    bench.validate()
    results = [
        run_layer(layer, bench, config.rng_seed, i)
        for i, layer in enumerate(bench.layers)
    ]
    report = SimReport()
    report.add("ticks", 0, "")
    report.add("n_pes", 1, "")
    report.add("mode", config.mode, "")
    report.add("seed", config.rng_seed, "")
    report.add("layers", len(results), "")
    freq = (100e6, 200e6, 400e6)[bench.pl - 1]
    report.add("peak_gops", peak_ops_per_s(freq) / 1e9, "GOPS")
    report.add("tops_per_w_model", 2.0 / bench.e_mac_pj, "TOPS/W")
    conv_speedups = [r.speedup for r in results if r.spec.mode == "conv"]
    mm_speedups = [r.speedup for r in results if r.spec.mode == "mm"]
    if conv_speedups:
        report.add("conv_speedup_min", min(conv_speedups), "x")
        report.add("conv_speedup_max", max(conv_speedups), "x")
    if mm_speedups:
        report.add("mm_speedup_min", min(mm_speedups), "x")
        report.add("mm_speedup_max", max(mm_speedups), "x")
    for r in results:
        report.add(f"speedup_{r.spec.name}", r.speedup, "x")
        report.add(f"utilization_{r.spec.name}", r.utilization, "")
    if out_dir:
        with open(f"{out_dir}/dnn_results.csv", "w", newline="") as fh:
            fh.write("layer,mode,accel_cycles,scalar_cycles,speedup,gops\n")
            for r in results:
                fh.write(
                    f"{r.spec.name},{r.spec.mode},{r.accel_cycles},"
                    f"{r.scalar_cycles!r},{r.speedup!r},{r.gops!r}\n"
                )
    return report

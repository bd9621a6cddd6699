"""Figure builders for the simulator's CSV outputs.

Five figure kinds are supported:

  raster       spike raster with the received-spike counts and the core
               performance level overlaid per core (three series: sent
               spikes blue, received spikes per core green, core PL red)
  tsp-hist     histogram of per-tick processing times, split by the
               performance level the tick ran at
  power-bars   grouped fixed-PL3 vs DVFS power bars per component
  nef-trace    channel input next to the decoded population estimate
  dnn-speedup  accelerator speedup per DNN layer, conv vs matrix multiply

Inputs are validated against the documented column schemas; a mismatch
raises SchemaError naming the offending column.  Rendering is read-only and
deterministic: the same CSV bytes produce the same PNG bytes.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PL_COLORS = {1: "#2a9d2a", 2: "#e0a800", 3: "#d03030"}


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


SCHEMAS = {
    "raster": ("time_ms", "pe", "neuron"),
    "pe_ticks": ("tick", "pe", "pl", "fifo_len", "t_sp_us", "spikes_out"),
    "power_compare": ("component", "only_pl3_mW", "dvfs_mW", "reduction_pct"),
    "nef_trace": ("time_ms", "input", "decoded"),
    "dnn_results": ("layer", "mode", "accel_cycles", "scalar_cycles", "speedup", "gops"),
}


def read_csv(path: str, schema: str) -> list[dict]:
    expected = SCHEMAS[schema]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected columns {expected}")
        for want, got in zip(expected, list(header) + [None] * len(expected)):
            if want != got:
                raise SchemaError(
                    f"{path}: expected column {want!r}, found {got!r}"
                )
        if len(header) != len(expected):
            raise SchemaError(f"{path}: unexpected extra column {header[len(expected)]!r}")
        return [dict(zip(expected, row)) for row in reader]


def _columns(rows: list[dict], *names: str, as_float: bool = True):
    out = []
    for name in names:
        values = [r[name] for r in rows]
        out.append(np.array(values, dtype=float) if as_float else values)
    return out


def build_raster(raster_csv: str, pe_ticks_csv: str):
    """Fig: sent spikes (blue), received per core (green), core PL (red)."""
    spikes = read_csv(raster_csv, "raster")
    ticks = read_csv(pe_ticks_csv, "pe_ticks")
    fig, ax = plt.subplots(figsize=(9, 6))
    pes = sorted({int(r["pe"]) for r in ticks}) or [0]
    n_per_band = 1 + max((int(r["neuron"]) for r in spikes), default=249)
    band = n_per_band * 1.25
    if spikes:
        t, pe, neuron = _columns(spikes, "time_ms", "pe", "neuron")
        ax.plot(t, pe * band + neuron, ".", color="#1f5fbf", markersize=1.5,
                label="sent spikes")
    handles_done = bool(spikes)
    for p in pes:
        rows = [r for r in ticks if int(r["pe"]) == p]
        t = np.array([float(r["tick"]) for r in rows])
        fifo = np.array([float(r["fifo_len"]) for r in rows])
        pl = np.array([float(r["pl"]) for r in rows])
        base = p * band
        scale = n_per_band / max(fifo.max(), 1.0)
        ax.plot(t, base + fifo * scale, color="#2a9d2a", linewidth=0.7,
                label="received spikes per core" if p == pes[0] else None)
        ax.step(t, base + (pl - 1) * (n_per_band / 2), where="post",
                color="#d03030", linewidth=0.9,
                label="core PL" if p == pes[0] else None)
    ax.set_yticks([p * band + n_per_band / 2 for p in pes])
    ax.set_yticklabels([f"PE{p}" for p in pes])
    ax.set_xlabel("time [ms]")
    ax.set_ylabel("core / neuron")
    ax.set_title("spike raster with received counts and performance level")
    ax.legend(loc="upper right", fontsize=8)
    return fig


def build_tsp_hist(pe_ticks_csv: str):
    ticks = read_csv(pe_ticks_csv, "pe_ticks")
    fig, ax = plt.subplots(figsize=(7, 5))
    data = {}
    for r in ticks:
        data.setdefault(int(r["pl"]), []).append(float(r["t_sp_us"]))
    bins = np.linspace(0.0, 1000.0, 101)
    for pl in sorted(data):
        ax.hist(data[pl], bins=bins, histtype="stepfilled", alpha=0.55,
                color=PL_COLORS.get(pl, "gray"), label=f"PL{pl}", log=True)
    ax.set_xlabel("processing time per 1 ms cycle [us]")
    ax.set_ylabel("simulation cycles")
    ax.set_title("processing time by performance level")
    if data:
        ax.legend()
    return fig


def build_power_bars(compare_csv: str):
    rows = read_csv(compare_csv, "power_compare")
    fig, ax = plt.subplots(figsize=(7, 5))
    labels = [r["component"] for r in rows]
    pl3, dvfs = _columns(rows, "only_pl3_mW", "dvfs_mW")
    x = np.arange(len(labels))
    width = 0.38
    ax.bar(x - width / 2, pl3, width, label="only PL3", color="#8888c8")
    ax.bar(x + width / 2, dvfs, width, label="DVFS", color="#2a9d2a")
    for xi, (a, b, r) in enumerate(zip(pl3, dvfs, rows)):
        ax.text(xi + width / 2, b, f"-{float(r['reduction_pct']):.1f}%",
                ha="center", va="bottom", fontsize=8)
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylabel("power [mW]")
    ax.set_title("power: fixed PL3 vs DVFS")
    ax.legend()
    return fig


def build_nef_trace(trace_csv: str):
    rows = read_csv(trace_csv, "nef_trace")
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if rows:
        t, x, xhat = _columns(rows, "time_ms", "input", "decoded")
        ax.plot(t, x, color="#333333", linewidth=1.2, label="input")
        ax.plot(t, xhat, color="#1f5fbf", linewidth=0.9, label="decoded output")
        ax.legend()
    ax.set_xlabel("time [ms]")
    ax.set_ylabel("represented value")
    ax.set_title("communication channel: input vs decoded population estimate")
    return fig


def build_dnn_speedup(results_csv: str):
    rows = read_csv(results_csv, "dnn_results")
    fig, ax = plt.subplots(figsize=(8, 5))
    if rows:
        labels = [r["layer"] for r in rows]
        speedups = np.array([float(r["speedup"]) for r in rows])
        colors = ["#2a9d2a" if r["mode"] == "conv" else "#e0a800" for r in rows]
        x = np.arange(len(labels))
        ax.bar(x, speedups, color=colors)
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
        from matplotlib.patches import Patch

        ax.legend(handles=[Patch(color="#2a9d2a", label="conv"),
                           Patch(color="#e0a800", label="matrix multiply")])
    ax.set_yscale("log")
    ax.set_ylabel("speedup vs scalar software baseline")
    ax.set_title("accelerator speedup per layer")
    return fig


FIGURE_KINDS = {
    "raster": (build_raster, 2, "raster.csv pe_ticks.csv"),
    "tsp-hist": (build_tsp_hist, 1, "pe_ticks.csv"),
    "power-bars": (build_power_bars, 1, "power_compare.csv"),
    "nef-trace": (build_nef_trace, 1, "nef_trace.csv"),
    "dnn-speedup": (build_dnn_speedup, 1, "dnn_results.csv"),
}


def render(kind: str, inputs: list[str], out_path: str) -> str:
    """Build one figure and write it; returns the output path."""
    if kind not in FIGURE_KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {sorted(FIGURE_KINDS)}")
    builder, n_inputs, usage = FIGURE_KINDS[kind]
    if len(inputs) != n_inputs:
        raise ValueError(f"{kind} needs {n_inputs} input file(s): {usage}")
    fig = builder(*inputs)
    fig.savefig(out_path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return out_path

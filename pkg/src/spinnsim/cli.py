"""Command-line front end.

Subcommands:

  run     execute one benchmark from a JSON config, writing trace/report CSVs
  sweep   fan a config out over a list of values for one dotted parameter
  verify  re-check the golden packet vectors, energy hand cases and MAC oracle
  tables  print the built-in default parameter tables

Exit codes: 0 success, 1 verification mismatch, 2 missing file,
3 invalid configuration (the diagnostic names the offending field path).
Stdout stays human-readable; all machine-readable output goes to files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .config import (
    ConfigError,
    SimConfig,
    dnn_default,
    load_config,
    nef_default,
    synfire_default,
)
from .energy import EnergyParams, compare_dvfs, energy_cycle
from .kernel import SimReport, power_summary_from_report, run_simulation
from .reference import ENERGY_HAND_CASES, naive_conv, naive_mm
from . import rng as rngmod

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_MISSING_FILE = 2
EXIT_BAD_CONFIG = 3

_DEFAULT_CONFIGS = {
    "synfire": synfire_default,
    "nef": nef_default,
    "dnn": dnn_default,
}

COMPARE_HEADER = "component,only_pl3_mW,dvfs_mW,reduction_pct"


def _apply_overrides(cfg: SimConfig, args: argparse.Namespace) -> SimConfig:
    if args.benchmark and cfg.benchmark.kind != args.benchmark:
        cfg = dataclasses.replace(cfg, benchmark=_DEFAULT_CONFIGS[args.benchmark]().benchmark)
    if args.mode:
        cfg = dataclasses.replace(cfg, mode=args.mode)
    if args.ticks is not None:
        cfg = dataclasses.replace(cfg, ticks=args.ticks)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    return cfg


def _replace_dotted(cfg, path: str, value):
    head, _, rest = path.partition(".")
    if not hasattr(cfg, head):
        raise ConfigError(path, "unknown parameter")
    if rest:
        return dataclasses.replace(cfg, **{head: _replace_dotted(getattr(cfg, head), rest, value)})
    return dataclasses.replace(cfg, **{head: value})


def write_compare_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(COMPARE_HEADER + "\n")
        for r in rows:
            fh.write(f"{r.component},{r.only_pl3_mw!r},{r.dvfs_mw!r},{r.reduction_pct!r}\n")


def cmd_run(args: argparse.Namespace) -> int:
    if not os.path.exists(args.config):
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_MISSING_FILE
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        cfg.validate()
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except ValueError as exc:
        print(f"error: invalid config: config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    report = run_simulation(cfg, out_dir)
    report.save(os.path.join(out_dir, "report.csv"))
    print(f"{cfg.benchmark.kind} run complete: {cfg.ticks} ticks, mode={cfg.mode}, "
          f"seed={cfg.rng_seed}")
    for metric in ("total_power_mW", "spikes_total", "nef_rmse", "conv_speedup_max"):
        if metric in report:
            print(f"  {metric} = {report.get(metric)}")
    print(f"  outputs in {out_dir}/")
    if args.compare_baseline:
        if not os.path.exists(args.compare_baseline):
            print(f"error: baseline report not found: {args.compare_baseline}", file=sys.stderr)
            return EXIT_MISSING_FILE
        base = power_summary_from_report(SimReport.load(args.compare_baseline))
        here = power_summary_from_report(report)
        if str(cfg.mode) == "dvfs":
            rows = compare_dvfs(here, base)
        else:
            rows = compare_dvfs(base, here)
        path = os.path.join(out_dir, "power_compare.csv")
        write_compare_csv(rows, path)
        print(f"  power comparison written to {path}")
        for r in rows:
            print(f"    {r.component:9s} {r.only_pl3_mw:8.2f} -> {r.dvfs_mw:8.2f} mW  "
                  f"(-{r.reduction_pct:.1f}%)")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    if not os.path.exists(args.config):
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_MISSING_FILE
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        values = [json.loads(v) for v in args.values.split(",")]
        runs = [(v, _replace_dotted(cfg, args.param, v)) for v in values]
        for _, c in runs:
            c.validate()
    except (ConfigError, ValueError) as exc:
        print(f"error: invalid sweep: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    os.makedirs(args.out, exist_ok=True)
    summary = [f"{args.param},total_power_mW,spikes_total"]
    for value, sub in runs:
        sub_dir = os.path.join(args.out, f"{args.param.replace('.', '_')}_{value}")
        report = run_simulation(sub, sub_dir)
        report.save(os.path.join(sub_dir, "report.csv"))
        total = report.get("total_power_mW") if "total_power_mW" in report else ""
        spikes = report.get("spikes_total") if "spikes_total" in report else ""
        summary.append(f"{value},{total},{spikes}")
        print(f"  {args.param}={value}: total_power_mW={total} spikes={spikes}")
    path = os.path.join(args.out, "sweep_summary.csv")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(summary) + "\n")
    print(f"sweep summary written to {path}")
    return EXIT_OK


def golden_packet(vec: dict):
    """Reconstruct the packet a golden-vector entry describes."""
    from .packets import DNocPacket, PacketClass, SpinnKind, SpinnPacket

    f = vec["fields"]
    if vec["family"] == "dnoc":
        return DNocPacket(
            dest_x=f["dest_x"], dest_y=f["dest_y"], dest_pe_mask=f["dest_pe_mask"],
            packet_class=PacketClass(f["packet_class"]), cmd=f["cmd"],
            tag=f["tag"], address=f["address"], payload=tuple(f["payload"]),
        )
    return SpinnPacket(
        kind=SpinnKind(f["kind"]), key_or_addr=f["key_or_addr"],
        payload=f["payload"], timestamp=f["timestamp"], emergency=f["emergency"],
    )


def _verify_golden(golden_path: str, failures: list[str]) -> None:
    from .packets import decode_dnoc, decode_spinn, encode_dnoc, encode_spinn

    with open(golden_path) as fh:
        vectors = json.load(fh)
    for vec in vectors:
        name, family, hexstr = vec["name"], vec["family"], vec["hex"]
        try:
            pkt = golden_packet(vec)
            frame = encode_dnoc(pkt) if family == "dnoc" else encode_spinn(pkt)
            if frame.hex() != hexstr:
                failures.append(
                    f"golden vector {name}: encoded {frame.hex()}, expected {hexstr}"
                )
                continue
            decoded = decode_dnoc(frame) if family == "dnoc" else decode_spinn(frame)
            if decoded != pkt:
                failures.append(f"golden vector {name}: decode mismatch")
        except Exception as exc:
            failures.append(f"golden vector {name}: {exc}")


def _verify_energy(failures: list[str]) -> None:
    params = EnergyParams()
    for pl, t_sp, n_neur, n_syn, sleep, expected in ENERGY_HAND_CASES:
        got = energy_cycle(pl, t_sp, n_neur, n_syn, params, sleep=sleep).total_j
        if abs(got - expected) > 1e-12 * max(expected, 1e-30):
            failures.append(
                f"energy case pl={pl} t_sp={t_sp}: got {got!r}, expected {expected!r}"
            )


def _verify_mac(failures: list[str]) -> None:
    from .mac import conv_execute, mm_execute

    gen = rngmod.stream(2024, rngmod.STREAM_TRAFFIC)
    for case in range(20):
        m, k, n = (int(x) for x in gen.integers(1, 17, 3))
        a = gen.integers(0, 256, (m, k), dtype=np.uint8)
        b = gen.integers(0, 256, (k, n), dtype=np.uint8)
        out, _ = mm_execute(a, b)
        if out.tolist() != naive_mm(a.tolist(), b.tolist()):
            failures.append(f"mac mm case {case} ({m}x{k}x{n}) mismatch")
    for case in range(8):
        h, w = (int(x) for x in gen.integers(3, 8, 2))
        c, f = (int(x) for x in gen.integers(1, 5, 2))
        r = int(gen.integers(1, min(h, 4)))
        s = int(gen.integers(1, min(w, 4)))
        ifmap = gen.integers(0, 256, (h, w, c), dtype=np.uint8)
        kern = gen.integers(0, 256, (r, s, c, f), dtype=np.uint8)
        out, _ = conv_execute(ifmap, kern)
        if out.tolist() != naive_conv(ifmap.tolist(), kern.tolist()):
            failures.append(f"mac conv case {case} mismatch")


def default_golden_path() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "golden_packets.json")


def cmd_verify(args: argparse.Namespace) -> int:
    golden = args.golden or default_golden_path()
    if not os.path.exists(golden):
        print(f"error: golden vector file not found: {golden}", file=sys.stderr)
        return EXIT_MISSING_FILE
    failures: list[str] = []
    _verify_golden(golden, failures)
    _verify_energy(failures)
    _verify_mac(failures)
    if failures:
        print(f"verification FAILED ({len(failures)} mismatches):")
        for f in failures:
            print(f"  - {f}")
        return EXIT_VERIFY_FAILED
    print("verification passed: golden packet vectors, energy hand cases, MAC oracle")
    return EXIT_OK


def cmd_tables(args: argparse.Namespace) -> int:
    params = EnergyParams()
    pls = ((1, 0.5, 100), (2, 0.5, 200), (3, 0.6, 400))
    print("energy model defaults (measured on the 8-PE prototype):")
    print("  level      vdd    freq     P_BL      e_neur    e_syn")
    for (pl, vdd, mhz) in pls:
        print(
            f"  PL{pl}      {vdd:.2f} V  {mhz:3d} MHz"
            f"  {params.p_bl_mw[pl - 1]:6.2f} mW"
            f"  {params.e_neur_nj[pl - 1]:5.2f} nJ"
            f"  {params.e_syn_nj[pl - 1]:5.2f} nJ"
        )
    cfg = synfire_default()
    spec = cfg.benchmark
    print("synfire chain defaults:")
    print(f"  neurons per core   {spec.neurons_per_pe}")
    print(f"  synapses per core  {spec.synapses_per_pe}")
    fan_out = spec.synapses_per_pe / spec.neurons_per_pe
    print(f"  avg fan-out        {fan_out:g}")
    print(f"  l_th1              {cfg.thresholds.l_th1}")
    print(f"  l_th2              {cfg.thresholds.l_th2}")
    print(f"  PE count (ring)    {spec.n_pes}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinnsim",
        description="many-core neuromorphic prototype simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one benchmark from a JSON config")
    p_run.add_argument("config", help="path to the JSON configuration")
    p_run.add_argument("--benchmark", choices=sorted(_DEFAULT_CONFIGS), default=None,
                       help="switch to this benchmark's committed defaults")
    p_run.add_argument("--mode", choices=("dvfs", "pl3", "pl1"), default=None)
    p_run.add_argument("--ticks", type=int, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=os.environ.get("SPINNSIM_OUT", "out"),
                       help="output directory (default $SPINNSIM_OUT or ./out)")
    p_run.add_argument("--compare-baseline", default=None, metavar="REPORT_CSV",
                       help="emit power_compare.csv against this fixed-PL report")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a config across parameter values")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, help="dotted path, e.g. thresholds.l_th1")
    p_sweep.add_argument("--values", required=True, help="comma-separated JSON scalars")
    p_sweep.add_argument("--benchmark", choices=sorted(_DEFAULT_CONFIGS), default=None)
    p_sweep.add_argument("--mode", choices=("dvfs", "pl3", "pl1"), default=None)
    p_sweep.add_argument("--ticks", type=int, default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=os.environ.get("SPINNSIM_OUT", "out"))
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="re-run golden vectors and oracle checks")
    p_verify.add_argument("--golden", default=None, help="golden vector JSON file")
    p_verify.set_defaults(func=cmd_verify)

    p_tables = sub.add_parser("tables", help="print built-in default parameter tables")
    p_tables.set_defaults(func=cmd_tables)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

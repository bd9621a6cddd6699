#!/usr/bin/env python3
"""Regenerate the committed sample CSVs under plots/sample_data/.

Runs a short synfire comparison, the NEF channel and the DNN suite, then
copies the plot-facing CSVs over.  The plot package's tests render every
figure kind from these files.
"""

from __future__ import annotations

import dataclasses
import os
import shutil
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from spinnsim.cli import write_compare_csv
from spinnsim.config import nef_default, synfire_default, dnn_default
from spinnsim.energy import compare_dvfs
from spinnsim.kernel import run_simulation

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "plots", "sample_data")


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    work = tempfile.mkdtemp(prefix="spinnsim_samples_")

    synfire = dataclasses.replace(synfire_default(), ticks=700)
    rep_pl3 = run_simulation(dataclasses.replace(synfire, mode="pl3"), f"{work}/pl3")
    rep_dvfs = run_simulation(dataclasses.replace(synfire, mode="dvfs"), f"{work}/dvfs")
    write_compare_csv(
        compare_dvfs(rep_dvfs.power, rep_pl3.power), f"{work}/dvfs/power_compare.csv"
    )
    for name in ("raster.csv", "pe_ticks.csv", "power_compare.csv"):
        shutil.copy(f"{work}/dvfs/{name}", os.path.join(OUT_DIR, name))

    run_simulation(nef_default(), f"{work}/nef")
    shutil.copy(f"{work}/nef/nef_trace.csv", os.path.join(OUT_DIR, "nef_trace.csv"))

    run_simulation(dnn_default(), f"{work}/dnn")
    shutil.copy(f"{work}/dnn/dnn_results.csv", os.path.join(OUT_DIR, "dnn_results.csv"))

    for name in sorted(os.listdir(OUT_DIR)):
        print(f"wrote {os.path.join(OUT_DIR, name)}")


if __name__ == "__main__":
    main()

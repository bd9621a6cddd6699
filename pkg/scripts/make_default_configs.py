#!/usr/bin/env python3
"""Write the committed benchmark configs from the in-code factories.

Keeps configs/*.json in lockstep with the calibrated defaults; the test
suite asserts they stay equal.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from spinnsim.config import dnn_default, nef_default, save_config, synfire_default

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, factory in (
        ("synfire", synfire_default),
        ("nef", nef_default),
        ("dnn", dnn_default),
    ):
        path = os.path.join(OUT_DIR, f"{name}.json")
        save_config(factory(), path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

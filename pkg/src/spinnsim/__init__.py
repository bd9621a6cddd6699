"""Desk-scale simulator of a SpiNNaker2-class many-core neuromorphic prototype.

Subsystems: bit-exact packet codecs (packets), the QPE mesh data/config NoCs
(noc), the chip-level spike router (spinn_router), the DVFS processing
element with its LIF pool and accelerator stubs (pe), the 4x16 MAC array
(mac), per-tick energy accounting (energy), the deterministic tick engine
(kernel), benchmark builders and drivers (benchmarks), and the command-line
front end (cli).
"""

from .config import SimConfig, load_config, synfire_default, nef_default, dnn_default
from .kernel import SimReport, run_simulation, seeded_rng

__all__ = [
    "SimConfig",
    "SimReport",
    "load_config",
    "run_simulation",
    "seeded_rng",
    "synfire_default",
    "nef_default",
    "dnn_default",
]

__version__ = "0.1.0"

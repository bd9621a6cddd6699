"""Paper-style figures from simulator CSV outputs.

This package never imports the simulator; it consumes only the documented
CSV files (raster, per-PE tick log, power comparison, NEF trace, DNN
results), so figures can be rebuilt from archived runs alone.
"""

from .figures import FIGURE_KINDS, SchemaError, render

__all__ = ["FIGURE_KINDS", "SchemaError", "render"]

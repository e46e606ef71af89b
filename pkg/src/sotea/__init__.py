"""Evolutionary optimization on self-organizing interaction networks.

Three steady-state EA variants (panmictic, cellular, sotea) with raw or
neighborhood-rank (epistatic) fitness on seeded NK landscapes, plus the
analysis and experiment harness that turn runs into CSV time series,
topology statistics, and graph snapshots.

The generation loop has a compiled kernel with a pure-Python fallback;
``sotea.engine.compiled_available()`` reports which one is active. Both
produce byte-identical output for the same configuration.
"""

__version__ = "0.1.0"

from .engine import EaConfig, compiled_available, run
from .landscape import NkLandscape

__all__ = ["EaConfig", "NkLandscape", "compiled_available", "run", "__version__"]

"""Verification laboratory for a boundary-degenerate fourth-order parabolic
equation on a periodic half-space strip.

Subpackages:

* :mod:`degenlab.powerlog` - exact surd/power-log calculus for the 1-D
  degenerate operator (kernel bases, particular solutions, admissibility);
* :mod:`degenlab.grid` - strip geometry, parabolic cylinders, quadrature;
* :mod:`degenlab.operator` - flux-form discrete operator with tangential
  mode decoupling and discrete integration-by-parts identities;
* :mod:`degenlab.evolution` - implicit time stepping, steady solves,
  manufactured solutions with closed-form forcing;
* :mod:`degenlab.estimates` - the inequality verification battery;
* :mod:`degenlab.scenarios` / :mod:`degenlab.cli` - orchestration and
  reporting;
* :mod:`degenlab.kernels` - compiled pentadiagonal solver core with a NumPy
  fallback selected at import time.
"""

from . import estimates, evolution, grid, kernels, operator, powerlog
from .config import RunConfig, load_config, parse_config, serialize_config
from .scenarios import SCENARIO_RUNNERS

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "SCENARIO_RUNNERS",
    "estimates",
    "evolution",
    "grid",
    "kernels",
    "load_config",
    "operator",
    "parse_config",
    "powerlog",
    "serialize_config",
    "__version__",
]

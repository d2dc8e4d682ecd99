"""Thermodynamically consistent nonlinear quantum master equation.

The compiled core lives in ``qdiss._core``; everything is re-exported here.
Matrices are complex numpy arrays; density matrices must be full rank
(eigenvalues above ``DEFAULT_P_FLOOR``).
"""

from ._core import *  # noqa: F401,F403
from ._core import (  # noqa: F401
    DEFAULT_P_FLOOR,
    System,
    canonical_correlation,
    compare,
    gibbs_state,
    harmonic_particle,
    log_mean,
    mollified_product,
    run,
    sweep,
    two_level,
    validate,
)

__version__ = "0.1.0"

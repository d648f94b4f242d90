"""Numerical tolerances and defaults shared across the package."""

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-12          # simplex normalisation slack
    row_sum: float = 1e-9        # largest drift a problem file may carry before rejection
    rel_change: float = 1e-10    # stopping rule on successive objective values
    kkt: float = 1e-8            # stop once a certificate (KKT residual or gap bound) drops below this
    descent_slack: float = 1e-12
    max_iters: int = 10_000
    nu_max: float = 50.0
    nu_doublings: int = 6
    nu_xtol: float = 1e-9
    nu_grid_points: int = 9
    rho_max: float = 20.0
    slope_points: int = 33


DEFAULT_TOL = Tolerances()


def thread_count():
    """Worker count for slope sweeps, capped by EXPONENT_KIT_THREADS (default 1)."""
    raw = os.environ.get("EXPONENT_KIT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)

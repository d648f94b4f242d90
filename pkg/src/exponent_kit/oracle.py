"""Ground-truth generators and conformance checks.

The lattice minimisers are deliberately naive: they enumerate every joint
distribution with entries in {0, 1/n, ..., 1} and evaluate the objective in
one vectorised pass, so they share no code path with the iterative solvers
beyond the objective itself.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import channel as ch
from . import source as src
from .channel import ChannelProblem, FamilyWeights, SlopeParams
from .config import DEFAULT_TOL
from .probability import JointDist

AGREEMENT_TOL = 1e-7


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 60
    max_dims: int = 9

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 2:
            raise ValueError("grid resolution must be an integer >= 2")
        if self.max_dims < 1:
            raise ValueError("max_dims must be positive")

    @classmethod
    def default_for(cls, shape):
        cells = int(np.prod(shape))
        n = 60 if cells <= 4 else 24 if cells <= 6 else 12
        return cls(n)


def compositions(n, k):
    """All k-tuples of nonnegative integers summing to n, in lexicographic order."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for first in range(n + 1):
        rest = compositions(n - first, k - 1)
        blocks.append(np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest]))
    out = np.vstack(blocks)
    assert out.shape[0] == comb(n + k - 1, k - 1)
    return out


def _lattice(shape, grid):
    cells = int(np.prod(shape))
    if cells > grid.max_dims:
        raise ValueError(f"|X||Y| = {cells} exceeds the grid guard of {grid.max_dims}")
    return compositions(grid.resolution, cells)


def _grid_min(values, counts, shape, n):
    """Minimum over finite values; ties go to the lexicographically first lattice point."""
    finite = np.isfinite(values)
    if not np.any(finite):
        raise ValueError("objective is infinite on every lattice point")
    # rows are generated in lexicographic order, so argmin's first-hit rule is the tie-break
    idx = int(np.argmin(np.where(finite, values, np.inf)))
    return float(values[idx]), JointDist(counts[idx].reshape(shape) / n)


def grid_min_theta_channel(params, prob, grid=None):
    """Exhaustive lattice minimum of Theta^{(lam, lam nu)}.  Returns (value, argmin JointDist)."""
    grid = grid or GridSpec.default_for(prob.shape)
    counts = _lattice(prob.shape, grid)
    masses = counts.reshape(-1, *prob.shape) / grid.resolution
    vals = ch.theta_batch(params.lam, params.mu, masses, prob)
    return _grid_min(vals, counts, prob.shape, grid.resolution)


def grid_min_theta_source(params, prob, grid=None):
    """Exhaustive lattice minimum of Theta_s^{(lam, lam nu)}.  Returns (value, argmin JointDist)."""
    grid = grid or GridSpec.default_for(prob.shape)
    counts = _lattice(prob.shape, grid)
    masses = counts.reshape(-1, *prob.shape) / grid.resolution
    vals = src.theta_s_batch(params.lam, params.mu, masses, prob)
    return _grid_min(vals, counts, prob.shape, grid.resolution)


# ---------------------------------------------------------------- agreement


def _channel_runs(lam):
    runs = [("tz", None), ("algB", None), ("jo", None), ("arimoto", None), ("param-arimoto", None)]
    for t in (FamilyWeights(1, 0, 0, 0), FamilyWeights(0, 0, 0, lam / (1 - lam)),
              FamilyWeights(1, 0, 0, lam / (1 - lam))):
        runs.append(("family", t))
    return runs


def _source_runs(lam):
    runs = [("gck1", None), ("gck2", None), ("jo", None), ("arimoto", None)]
    for t in (src.gck1_weights(lam), src.gck2_weights(), src.jo_source_weights(lam)):
        runs.append(("family", t))
    return runs


def _label(alg, t):
    if t is None:
        return alg
    return f"{alg}[{','.join(f'{w:.6g}' for w in t.as_tuple())}]"


@dataclass
class AgreementRow:
    lam: float
    nu: float
    values: dict
    max_deviation: float
    passed: bool


@dataclass
class AgreementReport:
    kind: str
    rows: list = field(default_factory=list)
    tol: float = AGREEMENT_TOL

    @property
    def max_deviation(self):
        return max((r.max_deviation for r in self.rows), default=0.0)

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def to_dict(self):
        return {
            "kind": self.kind,
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "tolerance": self.tol,
            "rows": [{"lambda": r.lam, "nu": r.nu, "values": r.values,
                      "max_deviation": r.max_deviation, "passed": r.passed} for r in self.rows],
        }


def agreement_report(prob, params_grid, stop=None, tol=AGREEMENT_TOL):
    """Run every applicable algorithm at each slope point and tabulate the spread of optima.

    Rows at lam in {0, 1} hold the closed-form value only.
    """
    is_channel = isinstance(prob, ChannelProblem)
    solve = ch.theta_min if is_channel else src.theta_s_min
    runs_for = _channel_runs if is_channel else _source_runs
    report = AgreementReport("channel" if is_channel else "source", tol=tol)
    for params in params_grid:
        if not isinstance(params, SlopeParams):
            params = SlopeParams(*params)
        if params.lam in (0.0, 1.0):
            values = {"closed_form": float(solve(params, prob)[0])}
        else:
            values = {}
            for alg, t in runs_for(params.lam):
                values[_label(alg, t)] = float(solve(params, prob, alg=alg, t=t, stop=stop)[0])
        v = np.array(list(values.values()))
        dev = float(v.max() - v.min()) if np.all(np.isfinite(v)) else float("inf")
        report.rows.append(AgreementRow(params.lam, params.nu, values, dev, dev <= tol))
    return report


def descent_audit(trace, slack=DEFAULT_TOL.descent_slack):
    """True iff the trace objective never increases by more than ``slack`` (relative above 1)."""
    obj = np.asarray(trace.objective if hasattr(trace, "objective") else trace, dtype=float)
    if obj.size < 2:
        return True
    prev, cur = obj[:-1], obj[1:]
    with np.errstate(invalid="ignore"):
        rises = cur - prev > slack * np.maximum(1.0, np.abs(prev))
    return not bool(np.any(rises))

"""Iteration driver and trace record shared by every alternating algorithm."""

import math
from dataclasses import dataclass, field
from enum import Enum

from .config import DEFAULT_TOL


class Termination(str, Enum):
    TOLERANCE_MET = "tolerance_met"
    MAX_ITERS = "max_iters"
    STALLED = "stalled"


@dataclass(frozen=True)
class StoppingRule:
    rel_tol: float = DEFAULT_TOL.rel_change
    max_iters: int = DEFAULT_TOL.max_iters
    kkt_tol: float = DEFAULT_TOL.kkt
    min_iters: int = 1


@dataclass
class IterationTrace:
    """Record of one algorithm run.

    ``objective`` holds the minimised objective after every half-step, so it is
    non-increasing for a correct run.  ``values`` holds one entry per full
    iteration (the quantity used by the stopping rule).  ``state`` carries the
    final distributions under algorithm-specific keys.
    """

    objective: list = field(default_factory=list)
    values: list = field(default_factory=list)
    iterations: int = 0
    termination: Termination = Termination.MAX_ITERS
    state: dict = field(default_factory=dict)
    kkt: list = field(default_factory=list)

    @property
    def value(self):
        return self.values[-1] if self.values else self.objective[-1]

    @property
    def converged(self):
        return self.termination is Termination.TOLERANCE_MET


def iterate(step, state, stop=None, initial=None, kkt=None, export=None):
    """Run ``state -> (state, half_step_objectives)`` until the stopping rule fires.

    The last entry of the half-step list is the per-iteration value compared by
    the relative-change test.  ``kkt(state)`` may return a residual; the run
    then ends once it drops below ``stop.kkt_tol`` (or the value stops moving
    altogether), since slow tails can make the relative change tiny well
    before the optimality conditions hold.  ``export(state)`` builds the
    ``state`` dict stored on the trace.
    """
    stop = stop or StoppingRule()
    trace = IterationTrace()
    if initial is not None:
        trace.objective.append(float(initial))
    prev = float(initial) if initial is not None else None
    for it in range(1, stop.max_iters + 1):
        state, halves = step(state)
        halves = [float(h) for h in halves]
        trace.objective.extend(halves)
        cur = halves[-1]
        trace.values.append(cur)
        trace.iterations = it
        if not math.isfinite(cur):
            trace.termination = Termination.STALLED
            break
        if kkt is not None:
            r = float(kkt(state))
            trace.kkt.append(r)
            if it >= stop.min_iters and r < stop.kkt_tol:
                trace.termination = Termination.TOLERANCE_MET
                break
        if prev is not None and it >= stop.min_iters:
            # with a KKT certificate available, value changes only end the run once they vanish
            tol = 0.0 if kkt is not None else stop.rel_tol * max(1.0, abs(cur))
            if abs(prev - cur) <= tol:
                trace.termination = Termination.TOLERANCE_MET
                break
        prev = cur
    else:
        trace.termination = Termination.MAX_ITERS
    trace.state = export(state) if export is not None else {"state": state}
    return trace

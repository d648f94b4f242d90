"""JSON problem files.

Channel::

    {"type": "channel", "matrix": [[0.9, 0.1], [0.1, 0.9]], "cost": [0, 1]}

Source::

    {"type": "source", "px": [0.5, 0.5], "distortion": [[0, 1], [1, 0]]}

``matrix`` rows are indexed by the input symbol.  ``cost`` is optional
(zero cost).  Rows whose sum is off by more than 1e-9 are rejected; smaller
drift is renormalised.
"""

import json
import warnings

import numpy as np

from .channel import ChannelProblem
from .config import DEFAULT_TOL
from .source import SourceProblem


class ProblemError(ValueError):
    """Malformed or invalid problem definition."""


def _array(obj, key, ndim):
    if key not in obj:
        raise ProblemError(f"missing key {key!r}")
    try:
        a = np.array(obj[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"{key!r} is not a numeric array") from exc
    if a.ndim != ndim:
        raise ProblemError(f"{key!r} must be {ndim}-dimensional")
    if not np.all(np.isfinite(a)):
        raise ProblemError(f"{key!r} has non-finite entries")
    if np.any(a < 0):
        raise ProblemError(f"{key!r} has negative entries")
    return a


def _check_sums(a, key, tol=DEFAULT_TOL.row_sum):
    sums = np.atleast_1d(a.sum(axis=-1))
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise ProblemError(f"{key!r} sums {sums[bad].tolist()} differ from 1 by more than {tol:g}")


def problem_from_dict(obj, strict=False):
    if not isinstance(obj, dict):
        raise ProblemError("problem must be a JSON object")
    kind = obj.get("type")
    try:
        if kind == "channel":
            w = _array(obj, "matrix", 2)
            _check_sums(w, "matrix")
            cost = _array(obj, "cost", 1) if "cost" in obj else None
            return ChannelProblem(w, cost)
        if kind == "source":
            px = _array(obj, "px", 1)
            _check_sums(px, "px")
            d = _array(obj, "distortion", 2)
            with warnings.catch_warnings():
                warnings.simplefilter("always")
                return SourceProblem(px, d, strict=strict)
    except ProblemError:
        raise
    except ValueError as exc:
        raise ProblemError(str(exc)) from exc
    raise ProblemError(f"unknown problem type {kind!r}; expected 'channel' or 'source'")


def problem_to_dict(prob):
    if isinstance(prob, ChannelProblem):
        return {"type": "channel", "matrix": prob.W.tolist(), "cost": prob.cost.tolist()}
    if isinstance(prob, SourceProblem):
        return {"type": "source", "px": prob.px.tolist(), "distortion": prob.distortion.tolist()}
    raise TypeError(f"not a problem: {type(prob).__name__}")


def parse_problem(path, strict=False):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"malformed JSON in {path}: {exc}") from exc
    return problem_from_dict(obj, strict=strict)


def emit_problem(prob, path=None):
    """Write the problem as JSON (floats use repr, so parsing it back is exact).  Returns the text."""
    text = json.dumps(problem_to_dict(prob), indent=2) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text

"""Error and strong-converse exponents for discrete memoryless channels and sources."""

from .channel import (
    ChannelProblem,
    FamilyWeights,
    SlopeParams,
    capacity,
    max_e0,
    minimax_theta_saddle,
    theta,
    theta_min,
)
from .curves import ExponentCurve, SampledFunction, channel_exponent_curve, lft_1d, source_exponent_curve
from .iteration import IterationTrace, StoppingRule, Termination
from .oracle import GridSpec, agreement_report, descent_audit, grid_min_theta_channel, grid_min_theta_source
from .probability import JointDist
from .problem_io import emit_problem, parse_problem
from .source import (
    SourceProblem,
    guessing_exponent,
    min_e0s,
    rate_distortion,
    theta_s,
    theta_s_min,
)

__version__ = "0.1.0"

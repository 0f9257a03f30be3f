"""Active learning of sparse halfspaces with stagewise p-norm mirror descent."""

from .errors import (BandExhausted, DegenerateInit, DegenerateOutput, InvalidArgument,
                     PhaseError, SolverFailure)
from .learner import (ConstantsConfig, PhaseParams, RunResult, averaging_baseline, initialize,
                      refine, refine_passive, run_main, schedule)
from .metrics import ErrorEstimate, disagreement, err_d, f_estimate
from .optimizer import ConstraintSet, MirrorProblem, md_step
from .oracle import NoiseModel, Oracle, TrueHalfspace
from .sampling import MarginalSpec, SampleStream, sample_band
from .vecmath import PNormParams, angle, bregman_div, hard_threshold, normalize

__version__ = "0.1.0"

__all__ = [
    "BandExhausted", "ConstantsConfig", "ConstraintSet", "DegenerateInit", "DegenerateOutput",
    "ErrorEstimate", "InvalidArgument", "MarginalSpec", "MirrorProblem", "NoiseModel", "Oracle",
    "PNormParams", "PhaseError", "PhaseParams", "RunResult", "SampleStream", "SolverFailure",
    "TrueHalfspace", "angle", "averaging_baseline", "bregman_div", "disagreement", "err_d",
    "f_estimate", "hard_threshold", "initialize", "md_step", "normalize", "refine",
    "refine_passive", "run_main", "sample_band", "schedule",
]

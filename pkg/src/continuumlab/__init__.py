"""Random chainable continua from composed Brownian paths: simulation and
experiments.

The package builds towers of independent two-sided Brownian motions with
counter-keyed randomness (every draw is a pure function of seed and
position, so queries commute, workers don't matter, and reruns are
bit-identical), estimates the limit intervals of composed images together
with convergence and witness diagnostics, and implements an exact
combinatorial model of reflected unit-step walks with thread enumeration
and relation-graph statistics.  A compiled extension accelerates the hot
kernels when available; the pure-Python fallback produces bit-identical
results.
"""

from .intervals import (Interval, cauchy_converged, dist, is_suitable, scale,
                        witness)
from .kernels import BACKEND
from .manifest import ExperimentManifest
from .paths import (DETERMINISTIC_FAMILIES, DeterministicPath, LazyBrownianPath,
                    QueryMode, level_for_step, make_brownian, make_deterministic)
from .stats import (KSResult, MeanCI, SampleSet, SlopeFit, ks_two_sample,
                    log_moment_slope, mean_ci, normal_cdf)
from .tower import CompositionTower, LimitEstimate, Thread
from .walks import (EnumerationOverflowError, FiniteThreadSet, RGraphStats,
                    TruncationError, Walk, WalkTower, enumerate_threads,
                    generate_tower, generate_walk, r_graph)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    "Interval", "dist", "scale", "witness", "is_suitable", "cauchy_converged",
    "QueryMode", "LazyBrownianPath", "DeterministicPath", "make_brownian",
    "make_deterministic", "level_for_step", "DETERMINISTIC_FAMILIES",
    "CompositionTower", "LimitEstimate", "Thread",
    "Walk", "WalkTower", "FiniteThreadSet", "RGraphStats", "generate_walk",
    "generate_tower", "enumerate_threads", "r_graph", "TruncationError",
    "EnumerationOverflowError",
    "SampleSet", "KSResult", "MeanCI", "SlopeFit", "ks_two_sample", "mean_ci",
    "log_moment_slope", "normal_cdf",
    "ExperimentManifest",
]

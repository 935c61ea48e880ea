"""Bayesian optimization over a categorical variable with per-category
continuous spaces, using one GP per category and Thompson sampling to pick
both the category and the point."""

from .baselines import AllocationPolicy, run_baseline, run_method
from .benchmarks import (
    BenchmarkSpec,
    Optimum,
    ackley_cat,
    alpine_cat,
    brute_force_optimum,
    func2d,
    make_benchmark,
    optimum_for,
)
from .errors import InvalidInputError, NumericalFailureError
from .gp import (
    FitGrid,
    GpState,
    KernelParams,
    PosteriorSummary,
    TrainingSet,
    build_state,
    cholesky_with_jitter,
    fit_hyperparameters,
    gram_matrix,
    kernel_eval,
    log_marginal_likelihood,
    posterior,
)
from .optimizer import (
    BanditBOConfig,
    Observation,
    OptimizerState,
    ProblemSpace,
    RunFailedError,
    Suggestion,
    initialize,
    observe,
    run,
    suggest_batch,
)
from .regret import AggregateSummary, RegretReport, aggregate, compute_regret
from .thompson import CandidateSet, ThompsonDraw, draw_posterior_sample, sample_candidates, thompson_argmax
from .trace import RunTrace, TraceRow

__version__ = "0.1.0"

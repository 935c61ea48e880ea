"""Regret bookkeeping and repeat aggregation for run traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class RegretReport:
    """Per-evaluation regret columns of one trace.

    ``instantaneous = mab + bo`` row-wise, where ``mab`` is the gap between
    the global optimum and the played category's optimum and ``bo`` is the
    gap between that category optimum and the value obtained.
    """

    instantaneous: np.ndarray
    cumulative: np.ndarray
    simple: np.ndarray
    mab: np.ndarray
    bo: np.ndarray
    is_init: np.ndarray
    global_optimum: float

    def optimize_only(self):
        """Cumulative regret restarted at the first post-init evaluation."""
        inst = self.instantaneous[~self.is_init]
        return np.cumsum(inst)


def compute_regret(trace, optimum):
    """Regret of ``trace`` against an :class:`~bandit_bo.benchmarks.Optimum`."""
    per_cat = np.asarray(optimum.per_category, dtype=float)
    C = trace.metadata.get("num_categories")
    if C is not None and C != per_cat.size:
        raise InvalidInputError(
            f"optimum covers {per_cat.size} categories, trace has {C}"
        )
    cats = trace.categories
    if cats.size and (cats.min() < 0 or cats.max() >= per_cat.size):
        raise InvalidInputError("trace category outside the optimum's range")
    f_star = float(optimum.value)
    values = trace.values
    f_cat = per_cat[cats] if cats.size else np.zeros(0)
    inst = f_star - values
    return RegretReport(
        instantaneous=inst,
        cumulative=np.cumsum(inst),
        simple=f_star - trace.best_so_far,
        mab=f_star - f_cat,
        bo=f_cat - values,
        is_init=trace.phases == "init",
        global_optimum=f_star,
    )


def checkpoints(n):
    """Indices (1-based counts) at a quarter, half, three quarters, and all of ``n``."""
    return [max(1, (k * n) // 4) for k in (1, 2, 3, 4)]


def sublinearity_ratios(report):
    """Post-init cumulative regret divided by count, at the four checkpoints."""
    cum = report.optimize_only()
    n = cum.size
    if n < 4:
        raise InvalidInputError("need at least 4 post-init evaluations")
    return np.array([cum[k - 1] / k for k in checkpoints(n)])


@dataclass(frozen=True)
class AggregateSummary:
    mean_best: np.ndarray
    se_best: np.ndarray
    final_mean: float
    final_se: float
    checkpoint_counts: tuple
    ratios: np.ndarray          # (repeats, 4) post-init CumRegret(k)/k
    mean_ratios: np.ndarray
    repeats: int
    fingerprint: str


def standard_error(samples, axis=0):
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    if n < 2:
        return np.full(np.delete(samples.shape, axis), np.nan) if samples.ndim > 1 else np.nan
    return samples.std(axis=axis, ddof=1) / np.sqrt(n)


def aggregate(traces, optimum=None):
    """Mean and standard error of best-so-far across repeated runs."""
    traces = list(traces)
    if not traces:
        raise InvalidInputError("aggregate needs at least one trace")
    fps = {t.fingerprint for t in traces}
    if len(fps) != 1:
        raise InvalidInputError(f"traces come from different configurations: {sorted(map(str, fps))}")
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise InvalidInputError(f"traces have different lengths: {sorted(lengths)}")
    best = np.vstack([t.best_so_far for t in traces])
    mean = best.mean(axis=0)
    se = standard_error(best) if len(traces) >= 2 else np.full(mean.shape, np.nan)
    n_opt = len(traces[0].optimize_rows())
    if optimum is not None and n_opt >= 4:
        ratios = np.vstack([sublinearity_ratios(compute_regret(t, optimum)) for t in traces])
        counts = tuple(checkpoints(n_opt))
    else:
        ratios = np.zeros((len(traces), 0))
        counts = ()
    return AggregateSummary(
        mean_best=mean,
        se_best=se,
        final_mean=float(mean[-1]),
        final_se=float(se[-1]),
        checkpoint_counts=counts,
        ratios=ratios,
        mean_ratios=ratios.mean(axis=0),
        repeats=len(traces),
        fingerprint=next(iter(fps)),
    )


def pooled_se(se_a, se_b):
    """Standard error of a difference of two independent means."""
    return float(np.hypot(se_a, se_b))

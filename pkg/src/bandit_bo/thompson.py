"""Thompson sampling from a category's posterior over random candidates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .gp import cholesky_with_jitter, posterior

DEFAULT_CANDIDATES = 500


@dataclass(frozen=True)
class CandidateSet:
    points: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim != 2 or P.shape[0] < 1:
            raise InvalidInputError("candidate set must be a nonempty (m, d) array")
        if P.min() < 0.0 or P.max() > 1.0:
            raise InvalidInputError("candidates must lie in the unit cube")
        object.__setattr__(self, "points", P)

    @property
    def count(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ThompsonDraw:
    """Winner of one posterior draw: normalized point and its sampled value."""

    best_point: np.ndarray
    best_value_standardized: float
    best_value_raw: float
    index: int = 0


def sample_candidates(space_dim, m, rng):
    """Draw ``m`` uniform points in ``[0, 1]^space_dim``, row by row."""
    if m < 1 or space_dim < 1:
        raise InvalidInputError("need m >= 1 and space_dim >= 1")
    return CandidateSet(rng.random((m, space_dim)))


def draw_posterior_sample(state, candidates, rng):
    """Joint posterior sample ``mu + L z`` over the candidate set."""
    post = posterior(state, candidates.points)
    L, _ = cholesky_with_jitter(post.covariance)
    z = rng.standard_normal(candidates.count)
    return post.mean + L @ z


def thompson_argmax(state, space_dim, m, rng):
    """Sample candidates, then one posterior path, and return its maximizer.

    ``np.argmax`` returns the first maximal index, which is the lowest-index
    tie-break.
    """
    candidates = sample_candidates(space_dim, m, rng)
    values = draw_posterior_sample(state, candidates, rng)
    i = int(np.argmax(values))
    train = state.train
    v = float(values[i])
    return ThompsonDraw(
        best_point=candidates.points[i].copy(),
        best_value_standardized=v,
        best_value_raw=v * train.raw_std + train.raw_mean,
        index=i,
    )

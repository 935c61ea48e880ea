"""Bandit-BO: per-category GPs with Thompson sampling over arms and points.

The loop is exposed two ways. :func:`run` drives an objective to a fixed
budget and returns a :class:`~bandit_bo.trace.RunTrace`. The ask/tell trio
:func:`initialize`, :func:`suggest_batch`, :func:`observe` lets an external
evaluator drive the same state machine one round at a time.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_streams
from .errors import InvalidInputError
from .gp import FitGrid, KernelParams, TrainingSet, fit_state
from .thompson import DEFAULT_CANDIDATES, thompson_argmax
from .trace import RunTrace, TraceRow


class EvaluationError(RuntimeError):
    """The objective raised while evaluating ``(category, point)``."""

    def __init__(self, category, point, cause):
        super().__init__(f"objective failed at category={category}, x={list(point)}: {cause!r}")
        self.category = category
        self.point = tuple(point)
        self.__cause__ = cause


class RunFailedError(RuntimeError):
    """A closed-loop run aborted; ``trace`` holds every evaluation done so far."""

    def __init__(self, message, trace, context=None):
        super().__init__(message)
        self.trace = trace
        self.context = dict(context or {})


@dataclass(frozen=True)
class ProblemSpace:
    """Categories ``0..C-1``, each with its own box of continuous bounds."""

    bounds: tuple

    def __post_init__(self):
        if len(self.bounds) < 1:
            raise InvalidInputError("need at least one category")
        norm = []
        for c, box in enumerate(self.bounds):
            box = tuple((float(lo), float(hi)) for lo, hi in box)
            if len(box) < 1:
                raise InvalidInputError(f"category {c} has no continuous dimensions")
            for lo, hi in box:
                if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                    raise InvalidInputError(f"category {c}: invalid bound ({lo}, {hi})")
            norm.append(box)
        object.__setattr__(self, "bounds", tuple(norm))

    @classmethod
    def uniform(cls, num_categories, box):
        """Every category shares the same box."""
        return cls(tuple(tuple(box) for _ in range(num_categories)))

    @property
    def num_categories(self):
        return len(self.bounds)

    @property
    def dims(self):
        return tuple(len(b) for b in self.bounds)

    def _lo_hi(self, c):
        arr = np.asarray(self.bounds[c])
        return arr[:, 0], arr[:, 1]

    def to_unit(self, c, x):
        lo, hi = self._lo_hi(c)
        u = (np.asarray(x, dtype=float) - lo) / (hi - lo)
        return np.clip(u, 0.0, 1.0)

    def from_unit(self, c, u):
        lo, hi = self._lo_hi(c)
        return np.clip(lo + np.asarray(u, dtype=float) * (hi - lo), lo, hi)

    def contains(self, c, x):
        if not 0 <= c < self.num_categories:
            return False
        x = np.asarray(x, dtype=float)
        lo, hi = self._lo_hi(c)
        return x.shape == lo.shape and bool(np.all(x >= lo) and np.all(x <= hi))


@dataclass(frozen=True)
class Observation:
    category: int
    point_raw: tuple
    value: float


@dataclass(frozen=True)
class Suggestion:
    """One batch element.

    ``contest`` holds each category's sampled maximum in objective units
    (NaN for categories that were not sampled this slot).
    """

    category: int
    point_raw: tuple
    predicted_value: float
    round: int = 0
    slot: int = 0
    contest: tuple = ()


@dataclass(frozen=True)
class BanditBOConfig:
    batch_size: int = 1
    n_candidates: int = DEFAULT_CANDIDATES
    n_init: int = 2
    noise_variance: float = 1e-4
    length_scales: tuple = tuple(np.logspace(-2, 1, 7).tolist())
    signal_variances: tuple = tuple(np.logspace(-2, 2, 7).tolist())
    obs_noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1")
        if self.n_candidates < 1:
            raise InvalidInputError("n_candidates must be >= 1")
        if self.n_init < 1:
            raise InvalidInputError("n_init must be >= 1")
        if self.obs_noise_std < 0:
            raise InvalidInputError("obs_noise_std must be >= 0")

    @property
    def fit_grid(self):
        return FitGrid(
            tuple(self.length_scales),
            tuple(self.signal_variances),
            self.noise_variance,
            KernelParams(1.0, 0.2, self.noise_variance),
        )

    def fingerprint(self, **extra):
        """Short hash of every setting except the seed."""
        d = dataclasses.asdict(self)
        d.pop("seed")
        d.update(extra)
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class OptimizerState:
    space: ProblemSpace
    config: BanditBOConfig
    history: tuple = ()
    gp_states: tuple = ()
    round: int = 0
    n_initial: int = 0
    pending: tuple = field(default=None)

    def category_data(self, c):
        obs = [o for o in self.history if o.category == c]
        X = np.array([self.space.to_unit(c, o.point_raw) for o in obs]).reshape(
            len(obs), self.space.dims[c]
        )
        y = np.array([o.value for o in obs], dtype=float)
        return X, y


def _fit_category(state, c):
    X, y = state.category_data(c)
    train = TrainingSet.from_raw(X, y, dim=state.space.dims[c])
    return fit_state(train, state.config.fit_grid)


def _evaluate(objective, c, x, config, eval_index):
    try:
        value = float(objective(c, np.asarray(x, dtype=float)))
    except Exception as exc:  # noqa: BLE001 - rewrapped with location
        raise EvaluationError(c, x, exc) from exc
    if config.obs_noise_std > 0:
        value += config.obs_noise_std * rng_streams.stream(config.seed, "noise", eval_index).standard_normal()
    return value


def initialize(space, objective, config=None, n_init=None, rng=None):
    """Evaluate ``n_init`` uniform points per category and fit every GP.

    Categories are visited in ascending order. ``rng`` defaults to the
    run's ``init`` stream, so every method sharing a seed shares its
    initial design.
    """
    config = config or BanditBOConfig()
    n_init = config.n_init if n_init is None else n_init
    if n_init < 1:
        raise InvalidInputError("n_init must be >= 1")
    rng = rng if rng is not None else rng_streams.stream(config.seed, "init")
    history = []
    for c in range(space.num_categories):
        for _ in range(n_init):
            u = rng.random(space.dims[c])
            x = space.from_unit(c, u)
            y = _evaluate(objective, c, x, config, len(history))
            history.append(Observation(c, tuple(x.tolist()), y))
    state = OptimizerState(space, config, tuple(history), (), 0, len(history))
    gps = tuple(_fit_category(state, c) for c in range(space.num_categories))
    return dataclasses.replace(state, gp_states=gps)


def thompson_contest(state, categories, round_index, slot, seed):
    """Independent Thompson draws for ``categories``, one stream per category."""
    draws = {}
    for c in categories:
        stream = rng_streams.stream(seed, "thompson", round_index, slot, c)
        draws[c] = thompson_argmax(
            state.gp_states[c], state.space.dims[c], state.config.n_candidates, stream
        )
    return draws


def _suggestion_from_draws(state, draws, round_index, slot):
    C = state.space.num_categories
    contest = np.full(C, np.nan)
    for c, d in draws.items():
        contest[c] = d.best_value_raw
    # ascending scan with strict '>' keeps the lowest index on ties
    best = None
    for c in sorted(draws):
        if best is None or draws[c].best_value_raw > draws[best].best_value_raw:
            best = c
    d = draws[best]
    x = state.space.from_unit(best, d.best_point)
    return Suggestion(best, tuple(x.tolist()), d.best_value_raw, round_index, slot, tuple(contest.tolist()))


def suggest_slot(state, slot, arm=None, seed=None):
    """One batch element. With ``arm`` given, only that category is sampled."""
    seed = state.config.seed if seed is None else seed
    round_index = state.round + 1
    categories = range(state.space.num_categories) if arm is None else [arm]
    draws = thompson_contest(state, categories, round_index, slot, seed)
    return _suggestion_from_draws(state, draws, round_index, slot)


def suggest_batch(state, size=None, seed=None):
    """Propose ``size`` (default ``batch_size``) points for the next round.

    Every slot samples the same frozen posteriors; slots differ only through
    their random streams.
    """
    size = state.config.batch_size if size is None else size
    if size < 1:
        raise InvalidInputError("batch size must be >= 1")
    batch = tuple(suggest_slot(state, b, seed=seed) for b in range(size))
    return batch, dataclasses.replace(state, pending=batch)


def observe(state, results):
    """Append one round of observations and refit the categories they touch."""
    results = tuple(results)
    if not results:
        raise InvalidInputError("observe needs at least one observation")
    pending = state.pending
    if pending is not None:
        if len(results) != len(pending):
            raise InvalidInputError(f"expected {len(pending)} observations, got {len(results)}")
        for s, o in zip(pending, results):
            if s.category != o.category or not np.allclose(s.point_raw, o.point_raw, rtol=0, atol=1e-12):
                raise InvalidInputError(
                    f"observation ({o.category}, {o.point_raw}) does not match suggestion"
                )
    for o in results:
        if not state.space.contains(o.category, o.point_raw):
            raise InvalidInputError(f"observation outside the search space: {o}")
        if not np.isfinite(o.value):
            raise InvalidInputError(f"non-finite observation value: {o}")
    new = dataclasses.replace(
        state, history=state.history + results, round=state.round + 1, pending=None
    )
    touched = {o.category for o in results}
    gps = tuple(
        _fit_category(new, c) if c in touched else state.gp_states[c]
        for c in range(state.space.num_categories)
    )
    return dataclasses.replace(new, gp_states=gps)


def _trace_metadata(space, config, budget, method, benchmark, seed):
    return {
        "benchmark": benchmark,
        "method": method,
        "num_categories": space.num_categories,
        "batch_size": config.batch_size,
        "budget": budget,
        "n_init": config.n_init,
        "seed": seed,
        "fingerprint": config.fingerprint(
            method=method, benchmark=benchmark, budget=budget, bounds=space.bounds
        ),
        "bounds": [list(map(list, b)) for b in space.bounds],
        "iteration_axis": "post-init evaluations; init rows flagged phase=init",
    }


def closed_loop(space, objective, budget, config, method, benchmark, propose):
    """Shared driver: init, then rounds of ``propose`` + evaluate + observe.

    ``propose(state, size)`` returns a tuple of suggestions for the round.
    The final round is truncated when ``budget`` is not a multiple of the
    batch size.
    """
    if budget < 0:
        raise InvalidInputError("budget must be >= 0")
    trace = RunTrace([], _trace_metadata(space, config, budget, method, benchmark, config.seed))
    try:
        state = initialize(space, objective, config)
    except EvaluationError as exc:
        raise RunFailedError(str(exc), trace, {"phase": "init"}) from exc
    for i, o in enumerate(state.history):
        trace.append(TraceRow.make(i, 0, i, o.category, o.point_raw, o.value, "init"))
    remaining = budget
    while remaining > 0:
        size = min(config.batch_size, remaining)
        try:
            batch = tuple(propose(state, size))
            state = dataclasses.replace(state, pending=batch)
            results = []
            for s in batch:
                y = _evaluate(objective, s.category, s.point_raw, config, len(trace.rows) + len(results))
                results.append(Observation(s.category, s.point_raw, y))
            state = observe(state, results)
        except Exception as exc:
            raise RunFailedError(
                f"run aborted in round {state.round + 1}: {exc}", trace, {"round": state.round + 1}
            ) from exc
        for s, o in zip(batch, results):
            trace.append(TraceRow.make(len(trace.rows), s.round, s.slot, o.category, o.point_raw, o.value, "optimize"))
        remaining -= size
    return trace


def run(space, objective, budget, config=None, seed=None, benchmark="custom"):
    """Run Bandit-BO for ``budget`` evaluations after the initial design.

    Sequential Bandit-BO is ``batch_size=1``; there is no separate path.
    """
    config = config or BanditBOConfig()
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)

    def propose(state, size):
        batch, _ = suggest_batch(state, size)
        return batch

    return closed_loop(space, objective, budget, config, "bandit", benchmark, propose)


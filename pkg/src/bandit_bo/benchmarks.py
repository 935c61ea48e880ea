"""Synthetic categorical-continuous test functions and a grid-search oracle.

Every function is maximized. Categories are the integers ``0..C-1`` and
enter each formula directly as the shift ``c``. Evaluators accept a single
point of shape (d,) and return a float, or a stack of shape (n, d) and
return an array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError
from .optimizer import ProblemSpace

ACKLEY_BOUNDS = (-32.768, 32.768)
FUNC2D_BOUNDS = (-2.0, 10.0)
ALPINE_BOUNDS = (1.0, 10.0)


def _points(x, dim, name):
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    X = np.atleast_2d(x) if x.ndim else x.reshape(1, 1)
    if X.shape[-1] != dim:
        raise InvalidInputError(f"{name} expects {dim}-d points, got shape {x.shape}")
    return X, single


def ackley_cat(c, x):
    """Negated Ackley-5d evaluated at ``z = x + c``, plus ``c``.

    The maximum of category ``c`` is ``c``, reached at ``x_i = -c``.
    """
    X, single = _points(x, 5, "ackley_cat")
    z = X + c
    term1 = -20.0 * np.exp(-0.2 * np.sqrt(np.mean(z**2, axis=-1)))
    term2 = -np.exp(np.mean(np.cos(2.0 * np.pi * z), axis=-1))
    f = -(term1 + term2 + 20.0 + np.e) + c
    return float(f[0]) if single else f


def func2d(c, x):
    """Three-bump 1-d function whose bumps drift apart with ``c``."""
    X, single = _points(x, 1, "func2d")
    x1 = X[..., 0]
    z1 = x1 - 0.05 * c
    z2 = x1 + 0.05 * c
    f = np.exp(-((z1 - 2.0) ** 2)) + np.exp(-((z1 - 6.0) ** 2) / 10.0) + 1.0 / (z2**2 + 1.0) + c / 2.0
    return float(f[0]) if single else f


def alpine_cat(c, x):
    """Product-form Alpine-4d at ``z = x + 2c``, plus ``2c``."""
    X, single = _points(x, 4, "alpine_cat")
    z = X + 2.0 * c
    if np.any(z < 0):
        raise InvalidInputError("alpine_cat needs x + 2c >= 0")
    f = np.prod(np.sqrt(z) * np.sin(z), axis=-1) + 2.0 * c
    return float(f[0]) if single else f


@dataclass(frozen=True)
class Optimum:
    """Best (category, point, value) plus every category's own maximum."""

    category: int
    point: tuple
    value: float
    per_category: tuple
    per_category_points: tuple = ()
    provenance: str = "DERIVED"

    def as_dict(self):
        return {
            "category": self.category,
            "point": list(self.point),
            "value": self.value,
            "per_category": list(self.per_category),
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    space: ProblemSpace
    evaluator: Callable
    known_optimum: Optional[Optimum] = None

    def __call__(self, c, x):
        return self.evaluator(c, x)


def _ackley_known(space):
    # category c peaks at x = -c when that point is inside its box
    vals, pts = [], []
    for c, box in enumerate(space.bounds):
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        target = np.full(5, -float(c))
        if np.all(target >= lo) and np.all(target <= hi):
            vals.append(float(c))
            pts.append(tuple(target.tolist()))
        else:
            return None
    best = int(np.argmax(vals))
    return Optimum(best, pts[best], vals[best], tuple(vals), tuple(pts), "DERIVED:analytic")


def make_benchmark(name, num_categories=6, bounds=None):
    """Build a named benchmark; ``bounds`` overrides the default (lo, hi) box."""
    if num_categories < 1:
        raise InvalidInputError("num_categories must be >= 1")
    if name == "ackley5":
        lo, hi = bounds or ACKLEY_BOUNDS
        space = ProblemSpace.uniform(num_categories, [(lo, hi)] * 5)
        return BenchmarkSpec(name, space, ackley_cat, _ackley_known(space))
    if name == "func2d":
        lo, hi = bounds or FUNC2D_BOUNDS
        return BenchmarkSpec(name, ProblemSpace.uniform(num_categories, [(lo, hi)]), func2d)
    if name == "alpine4":
        lo, hi = bounds or ALPINE_BOUNDS
        return BenchmarkSpec(name, ProblemSpace.uniform(num_categories, [(lo, hi)] * 4), alpine_cat)
    raise InvalidInputError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}")


BENCHMARKS = ("ackley5", "func2d", "alpine4")

_MAX_CHUNK = 1 << 18


def _grid_max(evaluator, c, axes):
    """Exhaustive max over the tensor grid ``axes``; first index wins ties."""
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape))
    best_val, best_idx = -np.inf, 0
    for start in range(0, total, _MAX_CHUNK):
        flat = np.arange(start, min(start + _MAX_CHUNK, total))
        idx = np.unravel_index(flat, shape)
        pts = np.stack([axes[k][idx[k]] for k in range(len(axes))], axis=-1)
        vals = np.asarray(evaluator(c, pts), dtype=float).reshape(-1)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_idx = float(vals[j]), int(flat[j])
    idx = np.unravel_index(best_idx, shape)
    return best_val, np.array([axes[k][idx[k]] for k in range(len(axes))])


def brute_force_optimum(spec, grid_per_dim, refine_levels=3, refine_points=5):
    """Grid search every category, then refine each incumbent locally.

    Refinement centres a ``refine_points``-per-dimension grid on the
    incumbent, spanning one coarse step either side, and halves that span
    at each of ``refine_levels`` levels. Across categories the best value
    wins and ties go to the smaller category index.
    """
    if grid_per_dim < 1:
        raise InvalidInputError("grid_per_dim must be >= 1")
    space = spec.space
    vals, pts = [], []
    for c, box in enumerate(space.bounds):
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        if grid_per_dim == 1:
            axes = [np.array([0.5 * (a + b)]) for a, b in zip(lo, hi)]
        else:
            axes = [np.linspace(a, b, grid_per_dim) for a, b in zip(lo, hi)]
        best, x = _grid_max(spec.evaluator, c, axes)
        if grid_per_dim > 1:
            half = (hi - lo) / (grid_per_dim - 1)
            for _ in range(refine_levels):
                local = [np.unique(np.clip(np.linspace(x[k] - half[k], x[k] + half[k], refine_points), lo[k], hi[k]))
                         for k in range(len(box))]
                v, xr = _grid_max(spec.evaluator, c, local)
                if v > best:
                    best, x = v, xr
                half = half / 2.0
        vals.append(best)
        pts.append(tuple(x.tolist()))
    c_best = int(np.argmax(vals))
    return Optimum(c_best, pts[c_best], vals[c_best], tuple(vals), tuple(pts), "DERIVED")


def optimum_for(spec, grid_per_dim=None):
    """Known analytic optimum if the benchmark has one, else a grid search.

    Default grids keep each category below ~10^6 evaluations.
    """
    if spec.known_optimum is not None:
        return spec.known_optimum
    if grid_per_dim is None:
        d = max(spec.space.dims)
        grid_per_dim = {1: 20001, 2: 1001, 3: 101, 4: 31}.get(d, 11)
    return brute_force_optimum(spec, grid_per_dim)


__all__ = [
    "ackley_cat", "func2d", "alpine_cat", "BenchmarkSpec", "Optimum",
    "make_benchmark", "brute_force_optimum", "optimum_for", "BENCHMARKS",
]

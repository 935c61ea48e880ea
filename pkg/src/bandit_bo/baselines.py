"""Arm-allocation baselines sharing Bandit-BO's GP/Thompson inner loop.

Only the choice of category differs from :func:`bandit_bo.optimizer.run`.
``oracle_arm`` always plays the best category, ``round_robin`` cycles the
categories, and ``uniform_random_arm`` picks one uniformly per slot.
``pure_random_search`` skips the GPs entirely.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng as rng_streams
from .errors import InvalidInputError
from .optimizer import BanditBOConfig, Suggestion, closed_loop, run, suggest_slot

POLICIES = ("oracle_arm", "round_robin", "uniform_random_arm", "pure_random_search")


@dataclass(frozen=True)
class AllocationPolicy:
    kind: str
    oracle_category: Optional[int] = None

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise InvalidInputError(f"unknown policy {self.kind!r}; choose from {POLICIES}")
        if self.kind == "oracle_arm" and self.oracle_category is None:
            raise InvalidInputError("oracle_arm needs oracle_category (the optimal category)")


def _slot_counter(state, slot):
    """Index of this slot among all post-init slots of the run."""
    return len(state.history) - state.n_initial + slot


def run_baseline(policy, space, objective, budget, config=None, seed=None, benchmark="custom"):
    """Run ``policy`` with the same initial design and budget as Bandit-BO."""
    config = config or BanditBOConfig()
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    C = space.num_categories
    if policy.kind == "oracle_arm" and not 0 <= policy.oracle_category < C:
        raise InvalidInputError(f"oracle_category {policy.oracle_category} outside 0..{C - 1}")

    def pick_arm(state, slot):
        if policy.kind == "oracle_arm":
            return policy.oracle_category
        if policy.kind == "round_robin":
            return _slot_counter(state, slot) % C
        g = rng_streams.stream(config.seed, "arm", state.round + 1, slot)
        return int(g.integers(C))

    def propose_gp(state, size):
        return [suggest_slot(state, b, arm=pick_arm(state, b)) for b in range(size)]

    def propose_random(state, size):
        out = []
        for b in range(size):
            g = rng_streams.stream(config.seed, "random_search", state.round + 1, b)
            c = int(g.integers(C))
            x = space.from_unit(c, g.random(space.dims[c]))
            out.append(Suggestion(c, tuple(x.tolist()), float("nan"), state.round + 1, b,
                                  tuple([np.nan] * C)))
        return out

    propose = propose_random if policy.kind == "pure_random_search" else propose_gp
    return closed_loop(space, objective, budget, config, policy.kind, benchmark, propose)


def run_method(method, space, objective, budget, config=None, seed=None, benchmark="custom",
               oracle_category=None):
    """Dispatch by name: ``"bandit"`` or any of :data:`POLICIES`."""
    if method == "bandit":
        return run(space, objective, budget, config, seed, benchmark)
    return run_baseline(AllocationPolicy(method, oracle_category), space, objective, budget,
                        config, seed, benchmark)

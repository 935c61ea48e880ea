import numpy as np
import pytest
from scipy import stats

from bandit_bo.baselines import AllocationPolicy, run_baseline, run_method
from bandit_bo.benchmarks import make_benchmark, optimum_for
from bandit_bo.errors import InvalidInputError
from bandit_bo.optimizer import BanditBOConfig, ProblemSpace, run
from bandit_bo.regret import compute_regret

FAST = BanditBOConfig(n_candidates=60)


def test_round_robin_counts():
    b = make_benchmark("func2d", 3)
    t = run_baseline(AllocationPolicy("round_robin"), b.space, b, 9, FAST, seed=0)
    counts = np.bincount([r.category for r in t.optimize_rows()], minlength=3)
    assert counts.tolist() == [3, 3, 3]
    assert [r.category for r in t.optimize_rows()][:3] == [0, 1, 2]


def test_round_robin_across_batches():
    b = make_benchmark("func2d", 3)
    cfg = BanditBOConfig(n_candidates=60, batch_size=2)
    t = run_baseline(AllocationPolicy("round_robin"), b.space, b, 6, cfg, seed=0)
    assert [r.category for r in t.optimize_rows()] == [0, 1, 2, 0, 1, 2]


def test_oracle_constant_arm():
    b = make_benchmark("func2d", 6)
    t = run_baseline(AllocationPolicy("oracle_arm", 4), b.space, b, 6, FAST, seed=1)
    assert {r.category for r in t.optimize_rows()} == {4}


def test_oracle_zero_mab_regret():
    b = make_benchmark("func2d", 6)
    opt = optimum_for(b, 2001)
    t = run_method("oracle_arm", b.space, b, 8, FAST, seed=2, oracle_category=opt.category)
    rep = compute_regret(t, opt)
    assert np.all(rep.mab[~rep.is_init] == 0.0)


def test_policy_validation():
    with pytest.raises(InvalidInputError):
        AllocationPolicy("oracle_arm")
    with pytest.raises(InvalidInputError):
        AllocationPolicy("greedy")


def test_single_category_all_gp_variants_identical():
    space = ProblemSpace.uniform(1, [(-2, 10)])
    f = make_benchmark("func2d", 1).evaluator
    ref = [(r.category, r.point_raw, r.value) for r in run(space, f, 6, FAST, seed=5).rows]
    for kind in ("oracle_arm", "round_robin", "uniform_random_arm"):
        t = run_baseline(AllocationPolicy(kind, 0), space, f, 6, FAST, seed=5)
        assert [(r.category, r.point_raw, r.value) for r in t.rows] == ref


def test_shared_initial_design():
    b = make_benchmark("func2d", 3)
    a = run(b.space, b, 2, FAST, seed=9)
    c = run_baseline(AllocationPolicy("pure_random_search"), b.space, b, 2, FAST, seed=9)
    assert a.rows[:6] == c.rows[:6]


def test_random_search_in_bounds():
    b = make_benchmark("alpine4", 3)
    t = run_baseline(AllocationPolicy("pure_random_search"), b.space, b, 30, FAST, seed=0)
    assert all(b.space.contains(r.category, r.point_raw) for r in t.rows)


def test_uniform_arm_allocation_chi_square():
    C, T = 3, 12
    cfg = BanditBOConfig(n_candidates=10)
    b = make_benchmark("func2d", C)
    counts = np.zeros(C)
    for seed in range(50):
        t = run_baseline(AllocationPolicy("uniform_random_arm"), b.space, b, T, cfg, seed=seed)
        counts += np.bincount([r.category for r in t.optimize_rows()], minlength=C)
    assert stats.chisquare(counts).pvalue > 0.001

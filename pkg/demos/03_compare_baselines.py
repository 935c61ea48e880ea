"""Bandit-BO against the two allocation extremes and random search.

An oracle that always plays the best category has no arm-selection regret;
round-robin and uniform allocation spend a fixed share on bad arms. This
script runs all of them on the 1-d benchmark with shared seeds and prints
the mean best value and the regret split.
"""

# %%
import numpy as np

from bandit_bo import BanditBOConfig, compute_regret, make_benchmark, optimum_for, run_method

bench = make_benchmark("func2d", num_categories=6)
opt = optimum_for(bench)
print(f"global optimum: category {opt.category}, f* = {opt.value:.5f}")

methods = ["oracle_arm", "bandit", "round_robin", "uniform_random_arm", "pure_random_search"]
config = BanditBOConfig(n_candidates=300)
budget, seeds = 40, range(5)

# %%
for m in methods:
    finals, mab, bo = [], [], []
    for s in seeds:
        trace = run_method(m, bench.space, bench, budget, config, seed=s,
                           benchmark="func2d", oracle_category=opt.category)
        rep = compute_regret(trace, opt)
        post = ~rep.is_init
        finals.append(trace.best_so_far[-1])
        mab.append(rep.mab[post].sum())
        bo.append(rep.bo[post].sum())
    print(f"{m:<20} best {np.mean(finals):.4f}   R_MAB {np.mean(mab):7.2f}   R_BO {np.mean(bo):6.2f}")

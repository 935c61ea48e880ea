"""Same evaluation budget, different batch sizes.

Within a round every slot samples the same posterior, so larger batches
trade some sample efficiency for parallelism. The budget counts
evaluations, not rounds.
"""

# %%
import numpy as np

from bandit_bo import BanditBOConfig, make_benchmark, run

bench = make_benchmark("alpine4", num_categories=6)
for B in (1, 5, 10):
    finals = [run(bench.space, bench, 60, BanditBOConfig(batch_size=B, n_candidates=300), seed=s).best_so_far[-1]
              for s in range(3)]
    print(f"B={B:<3} rounds={int(np.ceil(60 / B)):<3} mean best {np.mean(finals):.3f}")

"""GP regression on one category: fit, predict, sample.

Run with ``python demos/01_gp_posterior.py``.
"""

# %%
import numpy as np

from bandit_bo.gp import TrainingSet, fit_hyperparameters, build_state, posterior
from bandit_bo.thompson import CandidateSet, draw_posterior_sample

rng = np.random.default_rng(0)

# Eight noisy-free observations of a 1-d function on [0, 1].
X = rng.random((8, 1))
y = np.sin(6 * X[:, 0]) + 0.5 * X[:, 0]

# Targets are standardized before fitting; the raw scale is kept on the set.
train = TrainingSet.from_raw(X, y)
params = fit_hyperparameters(train)
print("ML-II choice:", params)

# %%
state = build_state(train, params)
grid = np.linspace(0, 1, 11).reshape(-1, 1)
post = posterior(state, grid)
mean_raw = post.mean * train.raw_std + train.raw_mean
sd_raw = np.sqrt(post.variance) * train.raw_std
for x, m, s in zip(grid[:, 0], mean_raw, sd_raw):
    print(f"x={x:.1f}  mean={m:+.3f}  sd={s:.3f}")

# %%
# A Thompson sample is one joint draw of the function over a candidate set.
draw = draw_posterior_sample(state, CandidateSet(grid), rng)
print("one posterior path:", np.round(draw * train.raw_std + train.raw_mean, 3))

"""Driving Bandit-BO from outside with the ask/tell API.

The objective here is a toy "model selection" problem: three model
families, each with its own continuous hyper-parameter box of a different
dimension. Any external evaluator (a training script, a lab instrument)
can sit where ``evaluate`` is.
"""

# %%
import numpy as np

from bandit_bo import BanditBOConfig, Observation, ProblemSpace, initialize, observe, suggest_batch

space = ProblemSpace((
    ((0.0, 1.0),),                      # family 0: one knob
    ((-1.0, 1.0), (-1.0, 1.0)),         # family 1: two knobs
    ((0.0, 5.0), (0.0, 5.0), (0.0, 5.0)),  # family 2: three knobs
))


def evaluate(c, x):
    x = np.asarray(x)
    peaks = [0.8, 1.2, 1.0]
    return float(peaks[c] - np.sum((x - x.mean()) ** 2) - 0.1 * np.sum(np.abs(x)))


# %%
config = BanditBOConfig(batch_size=3, seed=1)
state = initialize(space, evaluate, config)
print(f"initial design: {len(state.history)} points (2 per family)")

for _ in range(8):
    batch, state = suggest_batch(state)
    results = [Observation(s.category, s.point_raw, evaluate(s.category, s.point_raw)) for s in batch]
    state = observe(state, results)
    picks = [s.category for s in batch]
    print(f"round {state.round}: families {picks}, best so far "
          f"{max(o.value for o in state.history):.4f}")

# %%
best = max(state.history, key=lambda o: o.value)
print("best:", best)

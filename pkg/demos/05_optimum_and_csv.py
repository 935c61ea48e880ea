"""Brute-force optima, trace CSVs, and reading them back.

The CLI equivalents are::

    bandit-bo optimum --bench alpine4 --categories 6 --grid 41
    bandit-bo run --bench func2d --categories 6 --evals 50 --seed 7 --out runs/
    bandit-bo report runs/
"""

# %%
import tempfile
from pathlib import Path

from bandit_bo import RunTrace, brute_force_optimum, compute_regret, make_benchmark, run

bench = make_benchmark("func2d", 6)
opt = brute_force_optimum(bench, 10001)
print("per-category optima:", [round(v, 5) for v in opt.per_category])

# %%
trace = run(bench.space, bench, 20, seed=7, benchmark="func2d")
with tempfile.TemporaryDirectory() as tmp:
    path = trace.write_csv(Path(tmp) / "trace.csv")
    print(path.read_text().splitlines()[1])
    back = RunTrace.read_csv(path)
    assert back.rows == trace.rows

rep = compute_regret(back, opt)
print("simple regret after each evaluation:", rep.simple.round(4))

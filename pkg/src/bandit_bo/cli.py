"""Command-line harness: ``run``, ``compare``, ``optimum``, ``report``.

Settings may also come from a flat JSON file (``--config``) whose keys are
the long flag names with dashes replaced by underscores; flags given on
the command line win. The default output directory is ``$BANDIT_BO_OUT``
or ``./bandit_bo_runs``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .baselines import POLICIES, run_method
from .benchmarks import BENCHMARKS, brute_force_optimum, make_benchmark, optimum_for
from .errors import InvalidInputError, NumericalFailureError
from .optimizer import BanditBOConfig, RunFailedError
from .regret import aggregate, compute_regret, pooled_se
from .trace import RunTrace

OUT_ENV = "BANDIT_BO_OUT"
METHOD_ALIASES = {
    "bandit": "bandit",
    "bandit_bo": "bandit",
    "oracle": "oracle_arm",
    "round_robin": "round_robin",
    "uniform": "uniform_random_arm",
    "random_search": "pure_random_search",
}
METHOD_ALIASES.update({p: p for p in POLICIES})

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _method(name):
    try:
        return METHOD_ALIASES[name]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown method {name!r}; choose from {sorted(METHOD_ALIASES)}"
        ) from None


def _method_list(text):
    return [_method(m.strip()) for m in text.split(",") if m.strip()]


def _add_problem_args(p):
    p.add_argument("--bench", choices=BENCHMARKS, required=False)
    p.add_argument("--categories", type=int, default=6)
    p.add_argument("--bounds", type=float, nargs=2, metavar=("LO", "HI"),
                   help="override the benchmark's box (same for every dimension)")


def _add_run_args(p):
    _add_problem_args(p)
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--evals", type=int, default=120, help="post-initialization evaluations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--candidates", type=int, default=500)
    p.add_argument("--n-init", type=int, default=2)
    p.add_argument("--noise-variance", type=float, default=1e-4)
    p.add_argument("--obs-noise-std", type=float, default=0.0)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--config", type=Path, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="bandit-bo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one method on one benchmark")
    _add_run_args(p)
    p.add_argument("--method", type=_method, default="bandit")

    p = sub.add_parser("compare", help="Bandit-BO against baselines on shared seeds")
    _add_run_args(p)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--methods", type=_method_list,
                   default=["bandit", "round_robin", "pure_random_search"])
    p.add_argument("--jobs", type=int, default=1, help="worker processes for repeats")
    p.add_argument("--plot", action="store_true", help="also write an SVG of mean best-so-far")

    p = sub.add_parser("optimum", help="brute-force optimum of a benchmark")
    _add_problem_args(p)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--config", type=Path, default=None)

    p = sub.add_parser("report", help="regret and aggregates from stored traces")
    p.add_argument("paths", nargs="+", type=Path, help="trace CSVs or directories holding them")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--grid", type=int, default=None)
    return parser


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {cfg_path}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a flat JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        for key in ("method",):
            if key in cfg:
                cfg[key] = _method(cfg[key])
        if "methods" in cfg and isinstance(cfg["methods"], str):
            cfg["methods"] = _method_list(cfg["methods"])
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    if getattr(args, "bench", "x") is None:
        parser.error("--bench is required (flag or config file)")
    return args


def _out_dir(args):
    return Path(args.out or os.environ.get(OUT_ENV, "bandit_bo_runs"))


def _config(args, seed):
    return BanditBOConfig(
        batch_size=args.batch,
        n_candidates=args.candidates,
        n_init=args.n_init,
        noise_variance=args.noise_variance,
        obs_noise_std=args.obs_noise_std,
        seed=seed,
    )


def _trace_name(bench, method, C, B, T, seed):
    return f"{bench}_{method}_C{C}_B{B}_T{T}_seed{seed}.csv"


def _run_job(job):
    """Worker entry point; returns ``(name, csv_text, error)``."""
    bench, C, bounds, method, evals, config, oracle_category = job
    spec = make_benchmark(bench, C, bounds)
    name = _trace_name(bench, method, C, config.batch_size, evals, config.seed)
    try:
        trace = run_method(method, spec.space, spec.evaluator, evals, config,
                           benchmark=bench, oracle_category=oracle_category)
    except RunFailedError as exc:
        return name, exc.trace.to_csv_text(), str(exc)
    return name, trace.to_csv_text(), None


def _execute(jobs, n_workers):
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(j) for j in jobs]


def _write_text_atomic(path, text):
    trace = RunTrace.from_csv_text(text)
    return trace.write_csv(path)


def _summary_rows(groups, optimum):
    rows = []
    for method, traces in groups.items():
        summ = aggregate(traces, optimum)
        ratios = list(summ.mean_ratios) + [float("nan")] * (4 - len(summ.mean_ratios))
        rows.append({
            "method": method,
            "repeats": summ.repeats,
            "final_mean": summ.final_mean,
            "final_se": summ.final_se,
            "cumregret_ratio_q1": ratios[0],
            "cumregret_ratio_q2": ratios[1],
            "cumregret_ratio_q3": ratios[2],
            "cumregret_ratio_q4": ratios[3],
            "fingerprint": summ.fingerprint,
            "_summary": summ,
        })
    return rows


def _write_summary(out, rows, stream=sys.stdout):
    cols = ["method", "repeats", "final_mean", "final_se", "cumregret_ratio_q1",
            "cumregret_ratio_q2", "cumregret_ratio_q3", "cumregret_ratio_q4", "fingerprint"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in r.items()})
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(buf.getvalue())
    for r in rows:
        summ = r["_summary"]
        n_init = len(summ.mean_best) - (summ.checkpoint_counts[-1] if summ.checkpoint_counts else 0)
        lines = ["eval_index,mean_best_so_far,se_best_so_far"]
        for i in range(len(summ.mean_best)):
            lines.append(f"{i},{summ.mean_best[i]:.17g},{summ.se_best[i]:.17g}")
        (out / f"curve_{r['method']}.csv").write_text("\n".join(lines) + "\n")
        r["_n_init"] = n_init
    stream.write(f"{'method':<22}{'repeats':>8}{'final mean':>14}{'SE':>10}\n")
    for r in rows:
        stream.write(f"{r['method']:<22}{r['repeats']:>8}{r['final_mean']:>14.4f}{r['final_se']:>10.4f}\n")


def _plot(out, rows):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for r in rows:
        summ = r["_summary"]
        start = r.get("_n_init", 0)
        y = summ.mean_best[start:]
        se = np.nan_to_num(summ.se_best[start:])
        it = np.arange(1, len(y) + 1)
        ax.plot(it, y, label=r["method"])
        ax.fill_between(it, y - se, y + se, alpha=0.2)
    ax.set_xlabel("iteration")
    ax.set_ylabel("best value")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "best_so_far.svg")
    plt.close(fig)


def cmd_run(args):
    spec = make_benchmark(args.bench, args.categories, args.bounds)
    oracle = optimum_for(spec).category if args.method == "oracle_arm" else None
    job = (args.bench, args.categories, args.bounds, args.method, args.evals,
           _config(args, args.seed), oracle)
    name, text, err = _run_job(job)
    out = _out_dir(args)
    if err is not None:
        path = _write_text_atomic(out / name.replace(".csv", ".partial.csv"), text)
        print(f"error: {err}\npartial trace: {path}", file=sys.stderr)
        return EXIT_NUMERICAL
    path = _write_text_atomic(out / name, text)
    trace = RunTrace.from_csv_text(text)
    print(f"{path}\t{len(trace)} rows\tbest {trace.best_so_far[-1]:.6g}")
    return 0


def cmd_compare(args):
    if args.repeats < 1:
        raise InvalidInputError("--repeats must be >= 1")
    spec = make_benchmark(args.bench, args.categories, args.bounds)
    optimum = optimum_for(spec)
    out = _out_dir(args)
    jobs = [
        (args.bench, args.categories, args.bounds, m, args.evals,
         _config(args, args.seed + r), optimum.category if m == "oracle_arm" else None)
        for m in args.methods for r in range(args.repeats)
    ]
    results = _execute(jobs, args.jobs)
    groups = defaultdict(list)
    status = 0
    for job, (name, text, err) in zip(jobs, results):
        if err is not None:
            _write_text_atomic(out / "traces" / name.replace(".csv", ".partial.csv"), text)
            print(f"error in {name}: {err}", file=sys.stderr)
            status = EXIT_NUMERICAL
            continue
        _write_text_atomic(out / "traces" / name, text)
        groups[job[3]].append(RunTrace.from_csv_text(text))
    if status:
        return status
    rows = _summary_rows(groups, optimum)
    _write_summary(out, rows)
    if args.plot:
        _plot(out, rows)
    if len(rows) >= 2:
        a, b = rows[0], rows[1]
        gap = a["final_mean"] - b["final_mean"]
        print(f"{a['method']} - {b['method']}: {gap:.4f} "
              f"(pooled SE {pooled_se(a['final_se'], b['final_se']):.4f})")
    return 0


def cmd_optimum(args):
    spec = make_benchmark(args.bench, args.categories, args.bounds)
    grid = args.grid or {1: 20001, 4: 41, 5: 11}[max(spec.space.dims)]
    opt = brute_force_optimum(spec, grid)
    point = ",".join(format(v, ".10g") for v in opt.point)
    print(f"[{opt.provenance}] bench={args.bench} C={args.categories} grid={grid} "
          f"c*={opt.category} x*=({point}) f*={opt.value:.10g}")
    for c, v in enumerate(opt.per_category):
        print(f"  f*_{c} = {v:.10g}")
    return 0


def _collect(paths):
    files = []
    for p in paths:
        files.extend(sorted(p.glob("**/*.csv")) if p.is_dir() else [p])
    traces = []
    for f in files:
        try:
            traces.append((f, RunTrace.read_csv(f)))
        except InvalidInputError:
            continue
    return traces


def cmd_report(args):
    traces = _collect(args.paths)
    if not traces:
        raise InvalidInputError("no trace files found")
    by_fp = defaultdict(list)
    for f, t in traces:
        by_fp[t.fingerprint].append((f, t))
    out = Path(args.out or os.environ.get(OUT_ENV, "bandit_bo_runs")) / "report"
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for fp, items in by_fp.items():
        meta = items[0][1].metadata
        box = meta["bounds"][0][0]
        spec = make_benchmark(meta["benchmark"], meta["num_categories"], tuple(box))
        optimum = optimum_for(spec, args.grid)
        for f, t in items:
            rep = compute_regret(t, optimum)
            lines = ["eval_index,phase,instantaneous,cumulative,simple,mab,bo"]
            for i, r in enumerate(t.rows):
                lines.append(",".join([str(r.eval_index), r.phase] + [
                    format(float(col[i]), ".17g")
                    for col in (rep.instantaneous, rep.cumulative, rep.simple, rep.mab, rep.bo)]))
            (out / f"{Path(f).stem}.regret.csv").write_text("\n".join(lines) + "\n")
        groups = {f"{meta['method']}@{fp}": [t for _, t in items]}
        rows.extend(_summary_rows(groups, optimum))
    _write_summary(out, rows)
    return 0


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "optimum": cmd_optimum, "report": cmd_report}


def cli_main(argv=None):
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code not in (None, 0) else 0
    try:
        return COMMANDS[args.command](args)
    except (InvalidInputError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

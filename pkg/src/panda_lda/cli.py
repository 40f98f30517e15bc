"""Command-line entry point: ``panda-lda {simulate,fit,tune,oracle-check,kclass}``.

Exit codes: 0 ok, 1 threshold failure, 2 usage or config error, 3 solver failure.
"""
import argparse
import csv
import json
import logging
import math
import os
import sys
import time

import numpy as np

from .config import METHODS, MODES, ExperimentConfig
from .core import compute_suff_stats
from .datagen import ModelKind, SimSpec, build_covariance, rng_for, sample_gaussian
from .dataset_io import PipelineConfig, load_csv, prepare
from .errors import InvalidInputError, PandaError, SolverDivergedError
from .estimators import PRACTICAL_C, adalda_fit, kclass_panda_fit, kclass_predict, lpd_fit, panda_fit
from .evaluation import MetricsRow, auc, empirical_error, run_replicates
from .experiment import replicate_data
from .oracles import (
    adalda_oracle,
    instances,
    lpd_oracle,
    lp_violation,
    panda_oracle,
    panda_violation,
    relative_gap,
)
from .solver import AdmmConfig
from .tuning import TuneGrid, fit_method, grid_search

log = logging.getLogger("panda_lda")

EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

ROW_COLUMNS = [c for c in MetricsRow.columns() if c != "wall_time_s"]
TIMING_COLUMNS = ["replicate", "method", "wall_time_s"]
CURVE_COLUMNS = ["replicate", "method", "lambda_tilde", "c", "val_error", "pop_risk", "status"]
TRACE_COLUMNS = ["replicate", "method", "iteration", "primal_residual", "change", "objective"]

# flag name -> config key
_OVERRIDES = {
    "seed": "seed", "model": "model", "p": "p", "s": "s", "replicates": "replicates",
    "c": "c", "lambda_tilde": "lambda_tilde", "mode": "mode", "out": "output",
}


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in columns])


def _summary_columns(summary):
    cols = ["method", "replicates", "failed"]
    for key in summary[0]:
        if key not in cols:
            cols.append(key)
    return cols


def resolve_config(args):
    """Config file first, then command-line flags on top."""
    base = ExperimentConfig.load(args.config).to_dict() if args.config else ExperimentConfig().to_dict()
    for flag, key in _OVERRIDES.items():
        val = getattr(args, flag, None)
        if val is not None:
            base[key] = val
    if getattr(args, "n", None) is not None:
        base["n0"] = base["n1"] = args.n
    if getattr(args, "method", None):
        base["methods"] = args.method
    return ExperimentConfig.from_dict(base)


def write_manifest(config, out_dir_prefix, extra=None):
    path = os.path.join(os.path.dirname(out_dir_prefix) or ".", "run_manifest.json")
    doc = {"config": config.to_dict(), "seed": config.seed}
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def cmd_simulate(args):
    config = resolve_config(args)
    start = time.perf_counter()
    rows, summary, curves, traces = run_replicates(config, jobs=args.jobs)
    prefix = config.output
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)
    write_csv(f"{prefix}_rows.csv", ROW_COLUMNS, [r.as_dict() for r in rows])
    write_csv(f"{prefix}_timing.csv", TIMING_COLUMNS, [r.as_dict() for r in rows])
    write_csv(f"{prefix}_summary.csv", _summary_columns(summary), summary)
    if curves:
        write_csv(f"{prefix}_curve.csv", CURVE_COLUMNS, curves)
    if traces:
        write_csv(f"{prefix}_trace.csv", TRACE_COLUMNS, traces)
    write_manifest(config, prefix)
    for entry in summary:
        print(f"{entry['method']:>7}  risk {entry['pop_risk_mean']:.4f} ({entry['pop_risk_sd']:.4f})"
              f"  l2 {entry['l2_err_mean']:.4f}  TP {entry['tp_mean']:.2f}"
              f"  failed {entry['failed']}/{entry['replicates'] + entry['failed']}")
    log.info("simulate finished in %.1fs", time.perf_counter() - start)
    if any(e["replicates"] == 0 for e in summary):
        print("error: every replicate failed for at least one method", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_tune(args):
    """Tuning curves on a single simulated replicate."""
    config = resolve_config(args)
    model, train, val, _ = replicate_data(config, 0)
    stats = compute_suff_stats(*train)
    curves = []
    for method in config.methods:
        if method not in ("PANDA", "LPD", "AdaLDA"):
            continue
        res = grid_search(stats, val[0], val[1], method, config.grid(), config.admm(),
                          warm_start=config.warm_start, model=model)
        curves.extend({"replicate": 0, "method": method, **row} for row in res.curve)
        print(f"{method:>7}  best lambda_tilde {res.best_lambda_tilde:.2f}"
              f"  val error {min(r['val_error'] for r in res.curve if r['status'] != 'failed'):.4f}")
    prefix = config.output
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)
    write_csv(f"{prefix}_curve.csv", CURVE_COLUMNS, curves)
    write_manifest(config, prefix)
    return EXIT_OK


def _fit_one(method, train_stats, val, c, lambda_tilde, cfg):
    if lambda_tilde is not None:
        return fit_method(method, train_stats, lambda_tilde, c, cfg), lambda_tilde
    grid = TuneGrid(c_values=(c,))
    res = grid_search(train_stats, val.class_rows(0), val.class_rows(1), method, grid, cfg)
    return res.best_fit, res.best_lambda_tilde


def cmd_fit(args):
    """filter -> split -> t-select -> tune -> fit -> test on a two-class CSV."""
    data = load_csv(args.data, args.label_column, args.delimiter)
    counts = tuple(int(v) for v in args.counts.split(","))
    pipe = PipelineConfig(variance_fraction=args.variance_fraction, counts=counts,
                          n_features=args.n_features, seed=args.seed if args.seed is not None else 0)
    prep = prepare(data, pipe)
    stats = compute_suff_stats(prep.train.class_rows(0), prep.train.class_rows(1))
    cfg = AdmmConfig()
    method = (args.method or ["PANDA"])[0]
    if method not in ("PANDA", "LPD", "AdaLDA"):
        raise InvalidInputError(f"fit supports PANDA, LPD and AdaLDA, not {method}")
    c = args.c if args.c is not None else PRACTICAL_C
    fit, lt = _fit_one(method, stats, prep.val, c, args.lambda_tilde, cfg)
    test_err = empirical_error(fit.rule, prep.test.class_rows(0), prep.test.class_rows(1))
    test_auc = auc(fit.rule, prep.test.class_rows(0), prep.test.class_rows(1))
    prefix = args.out or "panda_fit"
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)
    names = prep.feature_names()
    write_csv(f"{prefix}_beta.csv", ["feature", "beta"],
              [{"feature": n, "beta": float(b)} for n, b in zip(names, fit.beta_hat)])
    prep.split.write_manifest(f"{prefix}_split.jsonl")
    manifest = {"command": "fit", "data": os.path.abspath(args.data), "method": method,
                "lambda_tilde": lt, "c": c if method == "PANDA" else None,
                "pipeline": {"variance_fraction": pipe.variance_fraction, "counts": list(counts),
                             "n_features": pipe.n_features, "seed": pipe.seed},
                "stages": [[name, info] for name, info in prep.stages], "test_error": test_err}
    with open(os.path.join(os.path.dirname(prefix) or ".", "run_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=list)
        fh.write("\n")
    for name, info in prep.stages:
        print(f"stage {name}: {info}")
    print(f"{method} lambda_tilde {lt:.2f}  nonzeros {int(np.sum(np.abs(fit.beta_hat) > 0.01))}"
          f"  test error {test_err:.4f}  AUC {test_auc:.4f}")
    return EXIT_OK


def oracle_report(n_instances=10, p_values=(1, 2, 3), seed=0, cfg=None):
    """Max relative objective gap and max violation of the solvers against the oracles."""
    cfg = cfg or AdmmConfig(primal_tol=1e-9, change_tol=1e-10, max_iters=200000)
    records = []
    for inst in instances(n_instances, p_values, seed):
        st = inst.stats
        sigma, mu_d = np.asarray(st.sigma_hat), np.asarray(st.mu_hat_d)
        lam = inst.panda_lam()
        kappa = lam * st.sigma_hat_max
        fit = panda_fit(st, inst.c, lam, cfg)
        ref, _, _ = panda_oracle(st, inst.c, lam)
        obj = float(np.abs(fit.beta_hat).sum() + inst.c * fit.tau_hat ** 2)
        records.append({"p": inst.p, "method": "PANDA", "objective": obj, "oracle": ref,
                        "gap": relative_gap(obj, ref),
                        "violation": panda_violation(sigma, mu_d, kappa, fit.beta_hat, fit.tau_hat)})
        fit = lpd_fit(st, lam, cfg)
        ref, _ = lpd_oracle(st, lam)
        obj = float(np.abs(fit.beta_hat).sum())
        records.append({"p": inst.p, "method": "LPD", "objective": obj, "oracle": ref,
                        "gap": relative_gap(obj, ref),
                        "violation": lp_violation(sigma, mu_d - kappa, mu_d + kappa, fit.beta_hat)})
        fit = adalda_fit(st, inst.adalda_lam, cfg)
        ref, _, _ = adalda_oracle(st, inst.adalda_lam)
        obj = float(np.abs(fit.beta_hat).sum())
        a = 4.0 * st.sigma_hat_max * st.log_p_over_n
        bound = a * math.sqrt(inst.adalda_lam * fit.delta_hat ** 2 + 1.0)
        records.append({"p": inst.p, "method": "AdaLDA", "objective": obj, "oracle": ref,
                        "gap": relative_gap(obj, ref),
                        "violation": lp_violation(sigma, mu_d - bound, mu_d + bound, fit.beta_hat)})
    return {
        "instances": n_instances * len(p_values),
        "max_gap": max((r["gap"] for r in records), default=0.0),
        "max_violation": max((r["violation"] for r in records), default=0.0),
        "records": records,
    }


def cmd_oracle_check(args):
    p_values = tuple(int(v) for v in args.p_values.split(","))
    if any(p < 1 or p > 3 for p in p_values):
        raise InvalidInputError("oracle-check supports p in {1, 2, 3}")
    seed = args.seed if args.seed is not None else 0
    report = oracle_report(args.instances, p_values, seed)
    ok = report["max_gap"] <= args.gap_tol and report["max_violation"] <= args.violation_tol
    print(f"instances {report['instances']}  max relative gap {report['max_gap']:.3e}"
          f"  max violation {report['max_violation']:.3e}  {'PASS' if ok else 'FAIL'}")
    if args.out:
        write_csv(f"{args.out}_oracle.csv", ["p", "method", "objective", "oracle", "gap", "violation"],
                  report["records"])
    return EXIT_OK if ok else EXIT_THRESHOLD


def kclass_model(k, p, s, seed):
    """K classes sharing an AR(1) covariance; class k >= 2 differs from class 1 on its own block."""
    if s * (k - 1) > p:
        raise InvalidInputError(f"need p >= s*(K-1) = {s * (k - 1)}")
    sigma, beta = build_covariance(SimSpec(model=ModelKind.AR1, p=p, s=s, seed=seed))
    means = [np.zeros(p)]
    for j in range(1, k):
        shifted = np.zeros(p)
        shifted[(j - 1) * s:j * s] = beta[:s]
        means.append(sigma @ shifted)
    return sigma, means


def cmd_kclass(args):
    k = args.k
    if k < 2:
        raise InvalidInputError("K must be at least 2")
    p = args.p or 50
    s = args.s or 5
    n = args.n or 200
    seed = args.seed if args.seed is not None else 0
    sigma, means = kclass_model(k, p, s, seed)
    rng = rng_for([seed, 0])
    train = [sample_gaussian(m, sigma, n, rng) for m in means]
    test_rng = rng_for([seed, 2])
    test = [sample_gaussian(m, sigma, args.n_test, test_rng) for m in means]
    c = args.c if args.c is not None else PRACTICAL_C
    lt = args.lambda_tilde if args.lambda_tilde is not None else 1.0
    lam = lt * math.sqrt(math.log(p) / n)
    fit = kclass_panda_fit(train, [c] * (k - 1), lam)
    z = np.vstack(test)
    truth = np.repeat(np.arange(1, k + 1), args.n_test)
    err = float(np.mean(kclass_predict(fit, z) != truth))
    rows = [{"k": j + 2, "tau_hat": fit.taus[j], "nonzeros": int(np.sum(np.abs(b) > 0.01))}
            for j, b in enumerate(fit.betas)]
    for r in rows:
        print(f"class {r['k']}: tau_hat {r['tau_hat']:.4f}  nonzeros {r['nonzeros']}")
    print(f"K={k} test error {err:.4f} (uniform guess {1 - 1 / k:.4f})")
    if args.out:
        write_csv(f"{args.out}_kclass.csv", ["k", "tau_hat", "nonzeros"], rows)
    return EXIT_OK


def _add_common(sp):
    sp.add_argument("--config", help="JSON config file (a run_manifest.json also works)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", help="output path prefix")
    sp.add_argument("--model", choices=[m.value for m in ModelKind])
    sp.add_argument("--p", type=int)
    sp.add_argument("--s", type=int)
    sp.add_argument("--n", type=int, help="training samples per class")
    sp.add_argument("--replicates", type=int)
    sp.add_argument("--method", action="append", choices=list(METHODS),
                    help="repeat to select several methods")
    sp.add_argument("--c", type=float)
    sp.add_argument("--lambda-tilde", type=float)
    sp.add_argument("--mode", choices=list(MODES))


def build_parser():
    parser = argparse.ArgumentParser(prog="panda-lda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("simulate", help="Monte-Carlo replicates on a simulated model")
    _add_common(sp)
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("tune", help="validation curves over lambda-tilde on one replicate")
    _add_common(sp)
    sp.set_defaults(func=cmd_tune)
    sp = sub.add_parser("fit", help="preprocess, tune and fit a two-class CSV dataset")
    _add_common(sp)
    sp.add_argument("--data", required=True)
    sp.add_argument("--label-column", default="label")
    sp.add_argument("--delimiter", default=",")
    sp.add_argument("--counts", default="29,15,9,5,9,5",
                    help="train0,train1,val0,val1,test0,test1")
    sp.add_argument("--n-features", type=int, default=2000)
    sp.add_argument("--variance-fraction", type=float, default=1 / 6)
    sp.set_defaults(func=cmd_fit)
    sp = sub.add_parser("oracle-check", help="compare the solvers with brute-force oracles at p <= 3")
    _add_common(sp)
    sp.add_argument("--instances", type=int, default=10, help="random instances per p")
    sp.add_argument("--p-values", default="1,2,3")
    sp.add_argument("--gap-tol", type=float, default=1e-2)
    sp.add_argument("--violation-tol", type=float, default=1e-6)
    sp.set_defaults(func=cmd_oracle_check)
    sp = sub.add_parser("kclass", help="K-class PANDA on a simulated shared-covariance model")
    _add_common(sp)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--n-test", type=int, default=1000)
    sp.set_defaults(func=cmd_kclass)
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("PANDA_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except SolverDivergedError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InvalidInputError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PandaError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Population risk of PANDA across c with lambda-tilde held at its c=20 validation choice.

    python scripts/c_sensitivity.py --replicates 10 --c 0.001 0.01 0.1 1 10 20 100
"""
import argparse

import numpy as np

from panda_lda.config import ExperimentConfig
from panda_lda.core import compute_suff_stats
from panda_lda.evaluation import safe_population_risk
from panda_lda.experiment import replicate_data
from panda_lda.solver import AdmmConfig
from panda_lda.tuning import TuneGrid, fit_method, grid_search


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", default="AR1")
    ap.add_argument("--p", type=int, default=400)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--c", type=float, nargs="+", default=[1e-3, 1e-2, 0.1, 1.0, 10.0, 20.0, 100.0])
    ap.add_argument("--per-c", action="store_true", help="tune lambda-tilde separately for every c")
    ap.add_argument("--max-iters", type=int, default=200000)
    args = ap.parse_args()
    cfg = ExperimentConfig(model=args.model, p=args.p, methods=["PANDA"], n_test=0,
                           admm_primal_tol=1e-5, admm_change_tol=1e-6)
    admm = AdmmConfig(primal_tol=1e-5, change_tol=1e-6, max_iters=args.max_iters)
    risks = {c: [] for c in args.c}
    for r in range(args.replicates):
        model, train, val, _ = replicate_data(cfg, r)
        stats = compute_suff_stats(*train)
        held = grid_search(stats, *val, "PANDA", cfg.grid(), cfg.admm()).best_lambda_tilde
        for c in args.c:
            if args.per_c:
                fit = grid_search(stats, *val, "PANDA", TuneGrid(cfg.grid().lambda_tilde_values, (c,)), admm).best_fit
            else:
                fit = fit_method("PANDA", stats, held, c, admm)
            risks[c].append(safe_population_risk(fit.rule, model))
        print(f"replicate {r}: lambda_tilde {held:.1f}  " +
              "  ".join(f"c={c:g}:{risks[c][-1]:.4f}" for c in args.c), flush=True)
    for c in args.c:
        print(f"c={c:<8g} risk {np.mean(risks[c]):.4f} ({np.std(risks[c], ddof=1):.4f})")


if __name__ == "__main__":
    main()

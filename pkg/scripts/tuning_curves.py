"""Validation error and population risk against lambda-tilde for PANDA and LPD.

Writes one CSV of curves per eta scale of the VaryingDiagonal model and prints
the spread of the selected lambda-tilde per method.

    python scripts/tuning_curves.py --eta 1 2 4 --replicates 10 --out results/curves
"""
import argparse
import os

import numpy as np

from panda_lda.cli import CURVE_COLUMNS, write_csv
from panda_lda.config import ExperimentConfig
from panda_lda.core import compute_suff_stats
from panda_lda.experiment import replicate_data
from panda_lda.tuning import grid_search


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eta", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    ap.add_argument("--p", type=int, default=400)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--methods", nargs="+", default=["PANDA", "LPD"])
    ap.add_argument("--out", default="results/curves")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    best = {m: [] for m in args.methods}
    for eta in args.eta:
        cfg = ExperimentConfig(model="VaryingDiagonal", p=args.p, eta_scale=eta, n_test=0,
                               admm_primal_tol=1e-5, admm_change_tol=1e-6)
        curves = []
        for r in range(args.replicates):
            model, train, val, _ = replicate_data(cfg, r)
            stats = compute_suff_stats(*train)
            for method in args.methods:
                res = grid_search(stats, *val, method, cfg.grid(), cfg.admm(), model=model)
                best[method].append(res.best_lambda_tilde)
                curves.extend({"replicate": r, "method": method, **row} for row in res.curve)
        write_csv(os.path.join(args.out, f"curves_eta{eta:g}.csv"), CURVE_COLUMNS, curves)
        print(f"eta {eta:g} done", flush=True)
    for method, values in best.items():
        print(f"{method:6s} selected lambda-tilde range {np.min(values):.1f}..{np.max(values):.1f}")


if __name__ == "__main__":
    main()

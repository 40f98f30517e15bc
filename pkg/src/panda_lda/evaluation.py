"""Estimation, risk, selection and ranking metrics, plus the replicate harness."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
import logging
import math
import time

import numpy as np
from scipy.stats import rankdata

from .core import compute_suff_stats, population_risk
from .errors import DegenerateRuleError, InvalidInputError, PandaError

log = logging.getLogger(__name__)


def estimation_errors(beta_hat, beta_star):
    beta_hat, beta_star = np.asarray(beta_hat, float), np.asarray(beta_star, float)
    if beta_hat.shape != beta_star.shape:
        raise InvalidInputError("beta_hat and beta_star differ in length")
    diff = beta_hat - beta_star
    return float(np.abs(diff).sum()), float(np.sqrt(diff @ diff))


def tau_relative_error(tau_hat, delta):
    if delta <= 0:
        raise InvalidInputError("delta must be positive")
    return abs(tau_hat ** 2 - delta ** 2) / delta ** 2


def safe_population_risk(rule, model):
    """Population risk, with 0.5 for the degenerate zero direction."""
    try:
        return population_risk(rule, model)
    except DegenerateRuleError:
        return 0.5


def empirical_error(rule, test0, test1):
    """Misclassification rate over the pooled test rows."""
    test0 = np.asarray(test0, dtype=float).reshape(-1, len(rule.beta))
    test1 = np.asarray(test1, dtype=float).reshape(-1, len(rule.beta))
    total = len(test0) + len(test1)
    if total == 0:
        raise InvalidInputError("empty test set")
    wrong = int(rule.predict(test0).sum()) + int((1 - rule.predict(test1)).sum())
    return wrong / total


def variable_selection(beta_hat, beta_star, threshold=0.01):
    """(TP, TN, precision, recall) of the support {|beta_hat_j| > threshold}.

    Precision with no selected coordinates is reported as 1; recall with an
    empty true support is reported as 1.
    """
    beta_hat, beta_star = np.asarray(beta_hat, float), np.asarray(beta_star, float)
    if beta_hat.shape != beta_star.shape:
        raise InvalidInputError("beta_hat and beta_star differ in length")
    pred = np.abs(beta_hat) > threshold
    true = beta_star != 0
    tp = int(np.sum(pred & true))
    tn = int(np.sum(~pred & ~true))
    n_pred, n_true = int(pred.sum()), int(true.sum())
    precision = tp / n_pred if n_pred else 1.0
    recall = tp / n_true if n_true else 1.0
    return tp, tn, precision, recall


def auc_from_scores(scores0, scores1):
    """Mann-Whitney AUC: P(score1 > score0) + P(tie)/2."""
    scores0, scores1 = np.ravel(scores0), np.ravel(scores1)
    n0, n1 = len(scores0), len(scores1)
    if n0 == 0 or n1 == 0:
        raise InvalidInputError("AUC needs at least one sample per class")
    ranks = rankdata(np.concatenate([scores0, scores1]))
    return float((ranks[n0:].sum() - n1 * (n1 + 1) / 2) / (n0 * n1))


def auc(rule, test0, test1):
    return auc_from_scores(rule.scores(np.atleast_2d(test0)), rule.scores(np.atleast_2d(test1)))


@dataclass
class MetricsRow:
    replicate: int
    method: str
    model: str
    p: int
    s: int
    n: int
    eta_scale: float
    seed: int
    status: str = "ok"
    lambda_tilde: float = math.nan
    c: float = math.nan
    l1_err: float = math.nan
    l2_err: float = math.nan
    tau_rel_err: float = math.nan
    pop_risk: float = math.nan
    test_err: float = math.nan
    tp: float = math.nan
    tn: float = math.nan
    precision: float = math.nan
    recall: float = math.nan
    auc: float = math.nan
    solver_iters: int = 0
    wall_time_s: float = 0.0

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def as_dict(self):
        return asdict(self)


METRIC_COLUMNS = ("lambda_tilde", "c", "l1_err", "l2_err", "tau_rel_err", "pop_risk", "test_err",
                  "tp", "tn", "precision", "recall", "auc", "wall_time_s")


def aggregate(rows, metrics=METRIC_COLUMNS):
    """Mean and sample sd (divisor R - 1) of each metric per method, over successful rows."""
    out = []
    for method in dict.fromkeys(r.method for r in rows):
        mine = [r for r in rows if r.method == method]
        ok = [r for r in mine if r.status == "ok"]
        entry = {"method": method, "replicates": len(ok), "failed": len(mine) - len(ok)}
        for m in metrics:
            vals = np.array([getattr(r, m) for r in ok], dtype=float)
            vals = vals[~np.isnan(vals)]
            entry[f"{m}_mean"] = float(vals.mean()) if len(vals) else math.nan
            entry[f"{m}_sd"] = float(vals.std(ddof=1)) if len(vals) > 1 else math.nan
        out.append(entry)
    return out


def run_replicate(config, replicate):
    """All methods on one replicate. Returns (rows, curve_rows, trace_rows)."""
    from .experiment import evaluate_replicate

    return evaluate_replicate(config, replicate)


def run_replicates(config, jobs=1):
    """Run every replicate of an experiment; returns (rows, summary, curves, traces).

    Replicate r uses seed config.seed + r. Results are ordered by replicate so
    the output does not depend on ``jobs``.
    """
    reps = range(config.replicates)
    if jobs > 1 and config.replicates > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_replicate, [config] * config.replicates, reps))
    else:
        results = [run_replicate(config, r) for r in reps]
    rows, curves, traces = [], [], []
    for r_rows, r_curve, r_trace in results:
        rows.extend(r_rows)
        curves.extend(r_curve)
        traces.extend(r_trace)
    return rows, aggregate(rows), curves, traces


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


__all__ = [
    "MetricsRow", "aggregate", "auc", "auc_from_scores", "compute_suff_stats", "empirical_error",
    "estimation_errors", "run_replicates", "safe_population_risk", "tau_relative_error",
    "variable_selection", "PandaError",
]

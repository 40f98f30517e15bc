"""Validation-set grid search over the dimensionless tuning factor lambda-tilde."""
from dataclasses import dataclass, field
import logging

import numpy as np

from .errors import InvalidInputError, PandaError, TuningFailedError
from .estimators import FITTERS, PRACTICAL_C
from .evaluation import empirical_error, safe_population_risk

log = logging.getLogger(__name__)


def default_lambda_grid():
    return tuple(round(0.1 * k, 1) for k in range(1, 81))


@dataclass(frozen=True)
class TuneGrid:
    lambda_tilde_values: tuple = field(default_factory=default_lambda_grid)
    c_values: tuple = (PRACTICAL_C,)

    def __post_init__(self):
        for name in ("lambda_tilde_values", "c_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals or any(v <= 0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
                raise InvalidInputError(f"{name} must be positive and strictly ascending")
            object.__setattr__(self, name, vals)

    @classmethod
    def single(cls, lambda_tilde, c=PRACTICAL_C):
        return cls((lambda_tilde,), (c,))


@dataclass(eq=False)
class TuneResult:
    best_lambda_tilde: float
    best_c: float
    best_fit: object
    curve: list

    def __iter__(self):
        # allows ``lam, fit, curve = grid_search(...)``
        return iter((self.best_lambda_tilde, self.best_fit, self.curve))


def fit_method(method, stats, lambda_tilde, c=PRACTICAL_C, cfg=None, init=None):
    lam = lambda_tilde * stats.log_p_over_n
    if method == "PANDA":
        return FITTERS[method](stats, c, lam, cfg, init)
    return FITTERS[method](stats, lam, cfg, init)


def grid_search(train_stats, val0, val1, method, grid=None, cfg=None, warm_start=True, model=None):
    """Fit every grid point on the training statistics and pick the best by validation error.

    Ties go to the smaller lambda-tilde (then the smaller c). When ``model`` is
    given the curve also records the population risk of each fit; it plays no
    part in the selection.
    """
    grid = grid or TuneGrid()
    if len(val0) + len(val1) == 0:
        raise InvalidInputError("validation set is empty")
    if method not in FITTERS:
        raise InvalidInputError(f"unknown method {method!r}")
    c_values = grid.c_values if method == "PANDA" else (None,)

    curve, failures = [], []
    best = None
    for c in c_values:
        init = None
        for lt in grid.lambda_tilde_values:
            try:
                fit = fit_method(method, train_stats, lt, c, cfg, init if warm_start else None)
            except PandaError as exc:
                failures.append({"lambda_tilde": lt, "c": c, "error": str(exc)})
                curve.append({"lambda_tilde": lt, "c": c, "val_error": float("nan"),
                              "pop_risk": float("nan"), "status": "failed"})
                init = None
                continue
            init = fit.warm
            err = empirical_error(fit.rule, val0, val1)
            row = {"lambda_tilde": lt, "c": c, "val_error": err,
                   "pop_risk": safe_population_risk(fit.rule, model) if model is not None else float("nan"),
                   "status": fit.solver_diag.get("status", "")}
            curve.append(row)
            # strict < keeps the earliest (smallest lambda-tilde, then smallest c) minimizer
            if best is None or err < best[0]:
                best = (err, lt, c, fit)
    if best is None:
        raise TuningFailedError(f"all {len(curve)} {method} fits failed", failures)
    log.debug("%s tuned: lambda_tilde=%.2f c=%s val_error=%.4f", method, best[1], best[2], best[0])
    return TuneResult(best_lambda_tilde=best[1], best_c=best[2], best_fit=best[3], curve=curve)

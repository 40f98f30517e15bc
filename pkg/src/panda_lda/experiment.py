"""One simulation replicate: sample, fit every requested method, score against the truth."""
from functools import lru_cache
import logging
import time

from .core import LinearRule, compute_suff_stats
from .datagen import build_covariance, build_model, sample
from .errors import PandaError
from .estimators import kclass_panda_fit, panda_fit, theoretical_defaults
from .evaluation import (
    MetricsRow,
    auc,
    empirical_error,
    estimation_errors,
    safe_population_risk,
    tau_relative_error,
    variable_selection,
)
from .tuning import fit_method, grid_search

log = logging.getLogger(__name__)

TRAIN, VAL, TEST = 0, 1, 2


@lru_cache(maxsize=8)
def cached_model(spec):
    """The model and its exact direction (the solved Sigma^{-1} mu_d carries rounding noise)."""
    return build_model(spec), build_covariance(spec)[1]


def replicate_data(config, replicate):
    """Train/validation/test samples of one replicate, each from its own sub-stream."""
    model, _ = cached_model(config.sim_spec())
    seed_r = config.seed + replicate
    train = sample(model, config.n0, config.n1, [seed_r, TRAIN])
    val = sample(model, config.n_val, config.n_val, [seed_r, VAL]) if config.n_val > 0 else None
    test = sample(model, config.n_test, config.n_test, [seed_r, TEST]) if config.n_test > 0 else None
    return model, train, val, test


class _Selector:
    """Chooses (c, lambda-tilde) per method according to the config mode, caching PANDA's choice."""

    def __init__(self, config, stats, val):
        self.config, self.stats, self.val = config, stats, val
        self.cfg = config.admm()
        self.curves = []
        self._panda = None

    def fit(self, method, model):
        cfg, stats = self.config, self.stats
        if method == "PANDA" and cfg.mode == "theoretical":
            c, lam = theoretical_defaults(stats)
            fit = panda_fit(stats, c, lam, self.cfg)
            return fit, lam / stats.log_p_over_n, c
        if cfg.mode == "fixed":
            fit = fit_method(method, stats, cfg.lambda_tilde, cfg.c, self.cfg)
            return fit, cfg.lambda_tilde, (cfg.c if method == "PANDA" else float("nan"))
        res = grid_search(stats, self.val[0], self.val[1], method, cfg.grid(), self.cfg,
                          warm_start=cfg.warm_start, model=model)
        self.curves.extend({"method": method, **row} for row in res.curve)
        c = res.best_c if method == "PANDA" else float("nan")
        return res.best_fit, res.best_lambda_tilde, c

    def panda_choice(self, model):
        if self._panda is None:
            fit, lt, c = self.fit("PANDA", model)
            self._panda = (fit, lt, c)
        return self._panda


def _score(row, rule, beta_star, model, test, threshold):
    row.l1_err, row.l2_err = estimation_errors(rule.beta, beta_star)
    row.pop_risk = safe_population_risk(rule, model)
    row.tp, row.tn, row.precision, row.recall = variable_selection(rule.beta, beta_star, threshold)
    if test is not None:
        row.test_err = empirical_error(rule, *test)
        row.auc = auc(rule, *test)


def evaluate_replicate(config, replicate):
    """Returns (rows, curve_rows, trace_rows) for one replicate."""
    model, train, val, test = replicate_data(config, replicate)
    spec = config.sim_spec()
    beta_star = cached_model(spec)[1]
    delta = model.delta
    stats = compute_suff_stats(*train)
    selector = _Selector(config, stats, val)
    base = dict(replicate=replicate, model=spec.model.value, p=spec.p, s=spec.s,
                n=min(config.n0, config.n1), eta_scale=spec.eta_scale, seed=config.seed + replicate)
    rows, traces = [], []

    for method in config.methods:
        row = MetricsRow(method=method, **base)
        start = time.perf_counter()
        try:
            if method == "Bayes":
                rule = model.bayes_rule()
                row.tau_rel_err = 0.0
            elif method == "KPANDA":
                _, lt, c = selector.panda_choice(model)
                kfit = kclass_panda_fit(list(train), [c], lt * stats.log_p_over_n, selector.cfg)
                rule = LinearRule(stats.mu_hat_m, kfit.betas[0])
                row.lambda_tilde, row.c = lt, c
                row.tau_rel_err = tau_relative_error(kfit.taus[0], delta)
                row.solver_iters = int(kfit.fits[0].solver_diag.get("iterations", 0))
            else:
                if method == "PANDA":
                    fit, lt, c = selector.panda_choice(model)
                else:
                    fit, lt, c = selector.fit(method, model)
                rule = fit.rule
                row.lambda_tilde, row.c = lt, c
                if fit.tau_hat is not None:
                    row.tau_rel_err = tau_relative_error(fit.tau_hat, delta)
                elif fit.delta_hat is not None:
                    row.tau_rel_err = tau_relative_error(fit.delta_hat, delta)
                row.solver_iters = int(fit.solver_diag.get("iterations", 0))
                traces.extend({"replicate": replicate, "method": method, **t} for t in fit.trace)
            _score(row, rule, beta_star, model, test, config.selection_threshold)
        except PandaError as exc:
            log.warning("replicate %d %s failed: %s", replicate, method, exc)
            row.status = f"failed: {type(exc).__name__}"
        row.wall_time_s = time.perf_counter() - start
        rows.append(row)

    curves = [{"replicate": replicate, **c} for c in selector.curves]
    return rows, curves, traces


def bayes_monte_carlo(model, n_draws, seed):
    """Empirical error of the Bayes rule on n_draws rows per class."""
    x0, x1 = sample(model, n_draws, n_draws, seed)
    return empirical_error(model.bayes_rule(), x0, x1)


__all__ = ["evaluate_replicate", "replicate_data", "bayes_monte_carlo", "cached_model"]

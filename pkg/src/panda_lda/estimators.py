"""PANDA, LPD, AdaLDA and K-class PANDA discriminant estimators."""
from dataclasses import dataclass, field

import numpy as np

from .core import LinearRule, SuffStats, pooled_scatter
from .errors import (
    EstimatorInfeasibleError,
    InsufficientDataError,
    InvalidInputError,
    InvalidParameterError,
    SolverDivergedError,
)
from .solver import (
    CONVERGED,
    DIVERGED,
    AdmmConfig,
    assemble_lp_program,
    assemble_panda_program,
    solve,
)

PRACTICAL_C = 20.0
THEORETICAL_LAMBDA_TILDE = 20.0


@dataclass(eq=False)
class FitResult:
    method: str
    beta_hat: np.ndarray
    rule: LinearRule
    lam: float
    c: float = None
    tau_hat: float = None
    delta_hat: float = None
    soc_active: bool = None
    solver_diag: dict = field(default_factory=dict)
    # opaque solver state(s) accepted back as ``init`` for warm starts
    warm: object = field(default=None, repr=False)
    trace: list = field(default_factory=list, repr=False)


def theoretical_defaults(stats):
    """The (c, lambda) pair that depends only on observed quantities."""
    rate = stats.log_p_over_n
    c = 1.0 / (8.0 * (np.abs(stats.mu_hat_d).max() + 4.0 * stats.sigma_hat_max * rate))
    return float(c), float(THEORETICAL_LAMBDA_TILDE * rate)


def _zero_solution_diag():
    return {"status": CONVERGED, "iterations": 0, "primal_residual": 0.0,
            "objective": 0.0, "violation": 0.0, "shortcut": True}


def _check_solution(sol, method):
    if sol.status == DIVERGED:
        raise SolverDivergedError(f"{method}: ADMM diverged after {sol.iterations} iterations", sol)


def panda_fit(stats, c, lam, cfg=None, init=None):
    """Solve the PANDA program and return the direction, tau and the rule at mu_m."""
    if c <= 0:
        raise InvalidParameterError(f"c must be positive, got {c}")
    if lam < 0:
        raise InvalidParameterError(f"lambda must be nonnegative, got {lam}")
    cfg = cfg or AdmmConfig()
    p = stats.p
    if np.abs(stats.mu_hat_d).max() <= lam * stats.sigma_hat_max:
        # (0, 0) is feasible with objective 0, hence the unique optimum
        beta, tau, diag, warm, trace = np.zeros(p), 0.0, _zero_solution_diag(), init, []
    else:
        sol = solve(assemble_panda_program(stats, c, lam), cfg, init)
        _check_solution(sol, "PANDA")
        beta, tau, diag, warm, trace = sol.beta_hat, max(sol.tau_hat, 0.0), sol.summary(), sol.state, sol.trace
    quad = float(np.sqrt(max(beta @ stats.sigma_hat @ beta, 0.0)))
    return FitResult(
        method="PANDA", beta_hat=beta, rule=LinearRule(stats.mu_hat_m, beta), lam=float(lam),
        c=float(c), tau_hat=tau, soc_active=abs(quad - tau) <= 1e-4 * (1 + tau),
        solver_diag=diag, warm=warm, trace=trace,
    )


def _lp_solve(stats, bound, coupling, cfg, init, method, lam):
    if np.abs(stats.mu_hat_d).max() <= bound:
        return np.zeros(stats.p), _zero_solution_diag(), init, []
    lip = None if coupling is not None else 2 * stats.sigma_hat_top_eig ** 2
    program = assemble_lp_program(stats.sigma_hat, stats.mu_hat_d, bound, coupling, lam, lip)
    sol = solve(program, cfg, init)
    _check_solution(sol, method)
    return sol.beta_hat, sol.summary(), sol.state, sol.trace


def lpd_fit(stats, lam, cfg=None, init=None):
    """min ||beta||_1 subject to ||Sigma beta - mu_d||_inf <= lam * sigma_max."""
    if lam < 0:
        raise InvalidParameterError(f"lambda must be nonnegative, got {lam}")
    cfg = cfg or AdmmConfig()
    beta, diag, warm, trace = _lp_solve(stats, lam * stats.sigma_hat_max, None, cfg, init, "LPD", lam)
    return FitResult(method="LPD", beta_hat=beta, rule=LinearRule(stats.mu_hat_m, beta),
                     lam=float(lam), solver_diag=diag, warm=warm, trace=trace)


def adalda_fit(stats, lam, cfg=None, init=None):
    """Two-stage AdaLDA: estimate Delta from a first LP, then re-solve with the plug-in bound."""
    if lam < 0:
        raise InvalidParameterError(f"lambda must be nonnegative, got {lam}")
    cfg = cfg or AdmmConfig()
    init1, init2 = init if init is not None else (None, None)
    scale = 4.0 * stats.sigma_hat_max * stats.log_p_over_n
    mu_d = stats.mu_hat_d

    beta1, diag1, warm1, _ = _lp_solve(stats, scale, scale * lam * mu_d, cfg, init1, "AdaLDA stage 1", lam)
    slack = lam * (beta1 @ mu_d) + 1.0
    if diag1["status"] != CONVERGED and (slack < 0 or diag1["violation"] > 1e-3 * (1 + np.abs(mu_d).max())):
        raise EstimatorInfeasibleError(
            "AdaLDA stage 1 did not reach a feasible point",
            {"stage1": diag1, "rhs_factor": float(slack)})
    delta_hat = float(np.sqrt(abs(beta1 @ mu_d)))

    bound2 = scale * np.sqrt(lam * delta_hat ** 2 + 1.0)
    beta, diag2, warm2, trace = _lp_solve(stats, bound2, None, cfg, init2, "AdaLDA stage 2", lam)
    return FitResult(
        method="AdaLDA", beta_hat=beta, rule=LinearRule(stats.mu_hat_m, beta), lam=float(lam),
        delta_hat=delta_hat, solver_diag={**diag2, "stage1": diag1}, warm=(warm1, warm2), trace=trace,
    )


@dataclass(eq=False)
class KClassFit:
    betas: list
    taus: list
    mu_hats: list
    priors: np.ndarray
    fits: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.priors = np.asarray(self.priors, dtype=float)
        if abs(self.priors.sum() - 1.0) > 1e-12 or np.any(self.priors < 0):
            raise InvalidInputError("priors must be nonnegative and sum to 1")

    @property
    def n_classes(self):
        return len(self.mu_hats)


def kclass_stats(class_samples):
    """Per-pair SuffStats (class 1 vs class k) sharing one pooled covariance."""
    xs = [np.asarray(x, dtype=float) for x in class_samples]
    if len(xs) < 2:
        raise InvalidInputError("need at least two classes")
    if any(x.ndim != 2 or x.shape[1] != xs[0].shape[1] for x in xs):
        raise InvalidInputError("all classes must be 2-D with the same number of columns")
    if any(len(x) < 2 for x in xs):
        raise InsufficientDataError("every class needs at least 2 samples")
    scatter, means = pooled_scatter(xs)
    sigma = scatter / sum(len(x) for x in xs)
    first = SuffStats(means[0], means[1], sigma, len(xs[0]), len(xs[1]))
    root = first.sigma_hat_sqrt
    pairs = [first] + [SuffStats(means[0], means[k], sigma, len(xs[0]), len(xs[k]), root)
                       for k in range(2, len(xs))]
    return pairs, means


def kclass_theoretical_c(pair_stats):
    return [theoretical_defaults(st)[0] for st in pair_stats]


def kclass_panda_fit(class_samples, c_list, lam, cfg=None, priors=None):
    """Fit one PANDA direction per class k >= 2 against class 1."""
    pairs, means = kclass_stats(class_samples)
    k_classes = len(means)
    if c_list is None:
        c_list = [PRACTICAL_C] * (k_classes - 1)
    if len(c_list) != k_classes - 1:
        raise InvalidInputError(f"expected {k_classes - 1} values of c, got {len(c_list)}")
    priors = np.full(k_classes, 1.0 / k_classes) if priors is None else priors
    fits = [panda_fit(st, ck, lam, cfg) for st, ck in zip(pairs, c_list)]
    return KClassFit(
        betas=[f.beta_hat for f in fits], taus=[f.tau_hat for f in fits],
        mu_hats=means, priors=priors, fits=fits,
    )


def kclass_scores(fit, z):
    """Discriminant scores D_1..D_K (columns) for each row of z."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    mu1 = fit.mu_hats[0]
    if z.shape[1] != len(mu1):
        raise InvalidInputError(f"expected {len(mu1)} features, got {z.shape[1]}")
    cols = [np.zeros(len(z))]
    for k in range(1, fit.n_classes):
        mid = (mu1 + fit.mu_hats[k]) / 2
        cols.append((z - mid) @ fit.betas[k - 1] + np.log(fit.priors[k] / fit.priors[0]))
    return np.column_stack(cols)


def kclass_predict(fit, z):
    """Labels in 1..K; argmax takes the first maximum, so ties go to the smallest k."""
    return np.argmax(kclass_scores(fit, z), axis=1) + 1


def kclass_classify(fit, z):
    return int(kclass_predict(fit, np.asarray(z, dtype=float)[None, :])[0])


FITTERS = {"PANDA": panda_fit, "LPD": lpd_fit, "AdaLDA": adalda_fit}

"""Proximal ADMM for the linear-plus-cone programs behind PANDA, LPD and AdaLDA.

Every program has the form

    minimize    ||beta||_1 + c * tau^2
    subject to  A_beta beta + A_u u + A_v v + A_w w + a_tau tau = b
                u >= 0,  v >= 0,  ||w||_2 <= tau

and is solved on the scaled-dual augmented Lagrangian

    L(x, s) = ||beta||_1 + c tau^2 + rho/2 ||A x - b + s||^2 - rho/2 ||s||^2

by one sweep per iteration: a proximal-gradient step on beta, projected
gradient steps on u, v and the joint (w, tau) block, then the dual update.
"""
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .linalg import power_iteration_norm2, sym_sqrt  # noqa: F401  (sym_sqrt re-exported)

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERS = "max_iters"
DIVERGED = "diverged"


def project_nonneg(x):
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def project_soc(x, t):
    """Euclidean projection of (x, t) onto {(x, t): ||x||_2 <= t}."""
    return project_soc_weighted(x, t, 1.0, 1.0)


def project_soc_weighted(x, t, wx, wt):
    """Projection onto the second-order cone in the metric wx*||.||^2 + wt*(.)^2.

    The minimizer lies on the ray through x (or at the origin), so the problem
    reduces to a scalar least-squares fit of the radius.
    """
    x = np.asarray(x, dtype=float)
    t = float(t)
    nx = np.linalg.norm(x)
    if nx <= t:
        return x.copy(), t
    r = (wx * nx + wt * t) / (wx + wt)
    if r <= 0.0:
        return np.zeros_like(x), 0.0
    return x * (r / nx), r


def prox_l1(x, threshold):
    if threshold < 0:
        raise InvalidParameterError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """Constraint blocks, right-hand side and penalty of one conic program.

    The slack blocks a_u, a_v, a_w must be signed selections: every column has
    a single +-1 entry and no two columns share a row. a_tau is stored flat.
    """

    a_beta: np.ndarray
    a_u: np.ndarray
    a_v: np.ndarray
    a_w: np.ndarray
    a_tau: np.ndarray
    b: np.ndarray
    c_penalty: float
    lam: float
    has_soc_block: bool = True
    # exact lambda_max(A_beta^T A_beta) when the assembler knows it
    beta_lipschitz: float = None

    def __post_init__(self):
        m, p = np.shape(self.a_beta)
        for name in ("a_u", "a_v", "a_w"):
            if np.shape(getattr(self, name)) != (m, p):
                raise InvalidInputError(f"{name} must have shape {(m, p)}")
        if np.shape(self.a_tau) not in ((m,), (m, 1)) or np.shape(self.b) != (m,):
            raise InvalidInputError("a_tau and b must have length m")
        if not np.all(np.isfinite(self.b)):
            raise InvalidInputError("b has non-finite entries")
        if self.c_penalty < 0 or self.lam < 0:
            raise InvalidParameterError("c_penalty and lam must be nonnegative")
        for name in ("a_beta", "a_u", "a_v", "a_w", "a_tau", "b"):
            arr = np.array(getattr(self, name), dtype=float)
            if name == "a_tau":
                arr = arr.reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return self.a_beta.shape

    def residual(self, state):
        """A x - b at a state (no dual term)."""
        ops = _operators(self)
        return ops.affine(ops.matvec(state.beta), state.u, state.v, state.w, state.tau)

    def objective(self, beta, tau):
        return float(np.abs(beta).sum() + self.c_penalty * tau * tau)

    def original_violation(self, beta, tau):
        """Largest violation of the program with slacks eliminated.

        Each slack is set to its best value given (beta, tau), so this is the
        violation of the original inequality and cone constraints.
        """
        ops = _operators(self)
        return ops.violation(ops.matvec(np.asarray(beta, dtype=float)), float(tau))


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    eta: float = None  # None: eta_factor / (rho * lambda_max(A_beta^T A_beta))
    eta_factor: float = 0.9
    max_iters: int = 20000
    primal_tol: float = 1e-6
    change_tol: float = 1e-8
    power_iters: int = 30
    trace_every: int = 0  # 0 disables trace rows

    def __post_init__(self):
        if self.rho <= 0 or (self.eta is not None and self.eta <= 0):
            raise InvalidParameterError("rho and eta must be positive")
        if self.primal_tol <= 0 or self.change_tol <= 0:
            raise InvalidParameterError("tolerances must be positive")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be at least 1")


@dataclass(eq=False)
class AdmmState:
    beta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    tau: float
    s: np.ndarray

    @classmethod
    def zeros(cls, program):
        m, p = program.shape
        return cls(np.zeros(p), np.zeros(p), np.zeros(p), np.zeros(p), 0.0, np.zeros(m))

    def copy(self):
        return AdmmState(self.beta.copy(), self.u.copy(), self.v.copy(), self.w.copy(),
                         float(self.tau), self.s.copy())

    def flat(self):
        return np.concatenate([self.beta, self.u, self.v, self.w, [self.tau]])

    def is_finite(self):
        return bool(np.all(np.isfinite(self.flat())) and np.all(np.isfinite(self.s)))


@dataclass(eq=False)
class Solution:
    beta_hat: np.ndarray
    tau_hat: float
    objective: float
    primal_residual: float
    iterations: int
    status: str
    residual_history: np.ndarray = field(repr=False, default=None)
    state: AdmmState = field(repr=False, default=None)
    violation: float = float("nan")
    trace: list = field(repr=False, default_factory=list)

    @property
    def converged(self):
        return self.status == CONVERGED

    def summary(self):
        return {"status": self.status, "iterations": self.iterations,
                "primal_residual": self.primal_residual, "objective": self.objective,
                "violation": self.violation}


def _selection(block, name):
    """Rows and signs of a signed-selection block, or None when it is all zero."""
    if not np.any(block):
        return None
    nz = block != 0
    if np.any(nz.sum(axis=0) != 1):
        raise InvalidInputError(f"{name} must have exactly one nonzero per column")
    rows = nz.argmax(axis=0)
    if len(np.unique(rows)) != len(rows):
        raise InvalidInputError(f"{name} columns must select distinct rows")
    sign = block[rows, np.arange(block.shape[1])]
    if np.any(np.abs(sign) != 1.0):
        raise InvalidInputError(f"{name} entries must be +1 or -1")
    return rows, sign


class _Operators:
    """Precomputed structure of a program for the iteration kernel."""

    def __init__(self, program):
        self.program = program
        # repeated rows of A_beta (PANDA and LPD stack Sigma twice) are multiplied once
        uniq, inverse = np.unique(program.a_beta, axis=0, return_inverse=True)
        self.a_uniq = np.ascontiguousarray(uniq)
        self.a_uniq_t = np.ascontiguousarray(uniq.T)
        self.inverse = inverse.reshape(-1)
        self.n_uniq = uniq.shape[0]
        self.u_sel = _selection(program.a_u, "a_u")
        self.v_sel = _selection(program.a_v, "a_v")
        self.w_sel = _selection(program.a_w, "a_w") if program.has_soc_block else None
        self.a_tau = program.a_tau if program.has_soc_block else np.zeros_like(program.a_tau)
        self.b = program.b
        self.b_norm = float(np.linalg.norm(program.b))
        self.tau_sq = float(self.a_tau @ self.a_tau)
        # w and tau decouple in the quadratic when their columns share no row
        self.wt_coupled = bool(self.w_sel is not None and np.any(self.a_tau[self.w_sel[0]]))
        used = np.zeros(len(self.b), dtype=bool)
        for sel in (self.u_sel, self.v_sel, self.w_sel):
            if sel is not None:
                used[sel[0]] = True
        self.free_rows = np.flatnonzero(~used)

    def matvec(self, x):
        return (self.a_uniq @ x)[self.inverse]

    def rmatvec(self, r):
        return self.a_uniq_t @ np.bincount(self.inverse, weights=r, minlength=self.n_uniq)

    def lipschitz_beta(self, config):
        if getattr(self, "_lip", None) is not None:
            return self._lip
        p = self.a_uniq.shape[1]
        est = power_iteration_norm2(self.matvec, self.rmatvec, p, n_iter=config.power_iters)
        hint = self.program.beta_lipschitz
        self._lip = max(est, hint) if hint is not None else est
        return self._lip

    @staticmethod
    def _scatter(out, sel, x):
        if sel is not None:
            rows, sign = sel
            out[rows] += sign * x

    def affine(self, a_beta_x, u, v, w, tau):
        out = a_beta_x - self.b
        self._scatter(out, self.u_sel, u)
        self._scatter(out, self.v_sel, v)
        self._scatter(out, self.w_sel, w)
        if self.tau_sq:
            out += self.a_tau * tau
        return out

    def violation(self, a_beta_x, tau):
        """Original-constraint violation with every slack at its best value."""
        q = self.b - a_beta_x - self.a_tau * tau
        viol = 0.0
        for sel in (self.u_sel, self.v_sel):
            if sel is not None:
                rows, sign = sel
                viol = max(viol, np.max(-sign * q[rows], initial=0.0))
        if self.w_sel is not None:
            viol = max(viol, np.linalg.norm(q[self.w_sel[0]]) - tau, -tau)
        if len(self.free_rows):
            viol = max(viol, np.abs(q[self.free_rows]).max())
        return float(max(viol, 0.0))


def _operators(program):
    ops = getattr(program, "_ops_cache", None)
    if ops is None:
        ops = _Operators(program)
        object.__setattr__(program, "_ops_cache", ops)
    return ops


@dataclass(frozen=True)
class _Steps:
    beta: float
    w: float
    tau: float


def _step_sizes(ops, config):
    rho = config.rho
    eta_beta = config.eta
    if eta_beta is None:
        lip = ops.lipschitz_beta(config)
        eta_beta = config.eta_factor / (rho * lip) if lip > 0 else 1.0 / rho
    c = ops.program.c_penalty
    if ops.wt_coupled:
        joint = 1.0 / (rho * (1.0 + ops.tau_sq) + 2 * c)
        return _Steps(eta_beta, joint, joint)
    tau_curv = rho * ops.tau_sq + 2 * c
    return _Steps(eta_beta, 1.0 / rho, 1.0 / tau_curv if tau_curv > 0 else 1.0 / rho)


def _sweep(ops, steps, rho, state, a_beta_x, r=None):
    """One iteration.

    ``r`` is A x - b + s at the incoming state; it is recomputed when omitted.
    Returns the new state, A_beta beta, the primal residual A x - b, and the
    new A x - b + s for the next sweep.
    """
    c = ops.program.c_penalty
    beta, u, v, w, tau, s = state.beta, state.u, state.v, state.w, state.tau, state.s
    if r is None:
        r = ops.affine(a_beta_x, u, v, w, tau) + s
    else:
        r = r.copy()

    beta = prox_l1(beta - steps.beta * rho * ops.rmatvec(r), steps.beta)
    new_abx = ops.matvec(beta)
    r += new_abx - a_beta_x

    # u and v enter only through their own rows, so their steps update r locally
    if ops.u_sel is not None:
        rows, sign = ops.u_sel
        u_new = project_nonneg(u - sign * r[rows])
        r[rows] += sign * (u_new - u)
        u = u_new
    if ops.v_sel is not None:
        rows, sign = ops.v_sel
        v_new = project_nonneg(v - sign * r[rows])
        r[rows] += sign * (v_new - v)
        v = v_new
    if ops.w_sel is not None:
        rows, sign = ops.w_sel
        w_trial = w - steps.w * rho * sign * r[rows]
        tau_trial = tau - steps.tau * (2 * c * tau + rho * (ops.a_tau @ r))
        w_new, tau_new = project_soc_weighted(w_trial, tau_trial, 1.0 / steps.w, 1.0 / steps.tau)
        r[rows] += sign * (w_new - w)
        r += ops.a_tau * (tau_new - tau)
        w, tau = w_new, tau_new

    primal = r - s
    # scaled dual update s <- s + (A x - b) equals r; the next r adds A x - b again
    return AdmmState(beta, u, v, w, tau, r), new_abx, primal, r + primal


def admm_step(state, program, config):
    """Apply one full ADMM sweep and return the new state."""
    ops = _operators(program)
    new_state, *_ = _sweep(ops, _step_sizes(ops, config), config.rho, state, ops.matvec(state.beta))
    return new_state


def _change(old, new):
    """||x_new - x_old|| / (1 + ||x_new||) over (beta, u, v, w, tau)."""
    diff = sq = 0.0
    for a, b in ((old.beta, new.beta), (old.u, new.u), (old.v, new.v), (old.w, new.w)):
        d = b - a
        diff += d @ d
        sq += b @ b
    diff += (new.tau - old.tau) ** 2
    sq += new.tau ** 2
    return math.sqrt(diff) / (1.0 + math.sqrt(sq))


def solve(program, config=None, init=None):
    """Iterate ADMM sweeps until the iterate is feasible and has stopped moving.

    Stops when the relative primal residual, the relative iterate change and
    the original-constraint violation (against 10 * primal_tol) are all small.
    Returns the final iterate on convergence. Otherwise returns the best
    feasible iterate: the lowest objective among iterates within tolerance of
    feasibility, or the smallest primal residual when none got that close.
    """
    config = config or AdmmConfig()
    ops = _operators(program)
    m, p = program.shape
    state = init.copy() if init is not None else AdmmState.zeros(program)
    steps = _step_sizes(ops, config)
    if state.beta.shape != (p,) or state.s.shape != (m,):
        raise InvalidInputError("initial state does not match the program dimensions")
    if not program.has_soc_block:
        state.w = np.zeros(p)
        state.tau = 0.0

    a_beta_x = ops.matvec(state.beta)
    r = None
    history = np.empty(config.max_iters)
    best_res, best_state = np.inf, None
    feas_obj, feas_state, feas_res = np.inf, None, np.inf
    trace = []
    status = MAX_ITERS
    scale = 1.0 + ops.b_norm
    it = 0
    for it in range(1, config.max_iters + 1):
        new_state, new_abx, primal, new_r = _sweep(ops, steps, config.rho, state, a_beta_x, r)
        res = math.sqrt(primal @ primal) / scale
        if not math.isfinite(res) or not math.isfinite(new_state.tau):
            status = DIVERGED
            it -= 1
            log.warning("ADMM diverged at iteration %d", it + 1)
            break
        change = _change(state, new_state)
        state, a_beta_x, r = new_state, new_abx, new_r
        history[it - 1] = res
        if res < best_res:
            best_res, best_state = res, state
        viol = None
        if res <= config.primal_tol:
            viol = ops.violation(a_beta_x, state.tau)
            if viol <= 10 * config.primal_tol:
                obj = program.objective(state.beta, state.tau)
                if obj < feas_obj:
                    feas_obj, feas_state, feas_res = obj, state, res
        if config.trace_every and (it % config.trace_every == 0 or it == 1):
            trace.append({"iteration": it, "primal_residual": res, "change": change,
                          "objective": program.objective(state.beta, state.tau)})
        if change <= config.change_tol and viol is not None and viol <= 10 * config.primal_tol:
            status = CONVERGED
            break

    if status == CONVERGED or best_state is None:
        final = state
        final_res = float(np.linalg.norm(program.residual(state)) / (1.0 + ops.b_norm))
    elif feas_state is not None:
        final, final_res = feas_state, feas_res
    else:
        final, final_res = best_state, best_res
    log.debug("ADMM %s after %d iterations, residual %.3e", status, it, final_res)
    return Solution(
        beta_hat=final.beta.copy(),
        tau_hat=float(final.tau),
        objective=program.objective(final.beta, final.tau),
        primal_residual=float(final_res),
        iterations=it,
        status=status,
        residual_history=history[:it].copy(),
        state=final.copy(),
        violation=program.original_violation(final.beta, final.tau),
        trace=trace,
    )


def _slack_block(m, p, offset, sign):
    block = np.zeros((m, p))
    block[offset + np.arange(p), np.arange(p)] = sign
    return block


def assemble_panda_program(stats, c, lam):
    """Slack form of the PANDA program.

    Rows 1..p:    Sigma beta - k tau 1 + u = mu_d + k 1
    Rows p+1..2p: Sigma beta + k tau 1 - v = mu_d - k 1
    Rows 2p+1..:  w - Sigma^{1/2} beta = 0
    with k = lam * sigma_max.
    """
    if c <= 0:
        raise InvalidParameterError(f"c must be positive, got {c}")
    if lam < 0:
        raise InvalidParameterError(f"lambda must be nonnegative, got {lam}")
    p = stats.p
    k = lam * stats.sigma_hat_max
    sig, root, mu_d = stats.sigma_hat, stats.sigma_hat_sqrt, stats.mu_hat_d
    ones = np.ones(p)
    top = stats.sigma_hat_top_eig
    return ConicProgram(
        a_beta=np.vstack([sig, sig, -root]),
        a_u=_slack_block(3 * p, p, 0, 1.0),
        a_v=_slack_block(3 * p, p, p, -1.0),
        a_w=_slack_block(3 * p, p, 2 * p, 1.0),
        a_tau=np.concatenate([-k * ones, k * ones, np.zeros(p)]),
        b=np.concatenate([mu_d + k, mu_d - k, np.zeros(p)]),
        c_penalty=float(c),
        lam=float(lam),
        has_soc_block=True,
        beta_lipschitz=2 * top * top + top,
    )


def assemble_lp_program(sigma_hat, mu_d, bound, coupling=None, lam=0.0, beta_lipschitz=None):
    """Slack form of min ||beta||_1 s.t. |Sigma beta - mu_d| <= bound + coupling^T beta.

    Rows 1..p:    (Sigma - 1 coupling^T) beta + u = mu_d + bound
    Rows p+1..2p: (Sigma + 1 coupling^T) beta - v = mu_d - bound
    The coupling term is how the AdaLDA first stage folds beta^T mu_d into the
    constraint; LPD uses coupling = 0.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    mu_d = np.asarray(mu_d, dtype=float)
    p = len(mu_d)
    top_block, bottom_block = sigma_hat, sigma_hat
    if coupling is not None:
        rank_one = np.outer(np.ones(p), coupling)
        top_block, bottom_block = sigma_hat - rank_one, sigma_hat + rank_one
        beta_lipschitz = None
    return ConicProgram(
        a_beta=np.vstack([top_block, bottom_block]),
        a_u=_slack_block(2 * p, p, 0, 1.0),
        a_v=_slack_block(2 * p, p, p, -1.0),
        a_w=np.zeros((2 * p, p)),
        a_tau=np.zeros(2 * p),
        b=np.concatenate([mu_d + bound, mu_d - bound]),
        c_penalty=0.0,
        lam=float(lam),
        has_soc_block=False,
        beta_lipschitz=beta_lipschitz,
    )


def with_config(config, **changes):
    return replace(config, **changes)

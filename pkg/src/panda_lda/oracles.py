"""Brute-force reference solutions for tiny problems (p <= 3).

These deliberately avoid the ADMM machinery. PANDA is solved by a dense
zooming grid over beta with tau eliminated in closed form: for fixed beta the
smallest feasible tau is

    tau*(beta) = max(sqrt(beta' S beta), ||S beta - mu_d||_inf / kappa - 1, 0),

and the objective is increasing in tau, so the program reduces to minimizing
||beta||_1 + c * tau*(beta)^2 over beta. The LP baselines are solved exactly by
enumerating the vertices of the arrangement formed by the constraint
hyperplanes and the coordinate hyperplanes beta_j = 0.
"""
from dataclasses import dataclass
import itertools
import math

import numpy as np

from .core import compute_suff_stats
from .datagen import rng_for
from .errors import InvalidInputError


def panda_tau_star(sigma_hat, mu_d, kappa, betas):
    """Smallest feasible tau for each row of ``betas``."""
    betas = np.atleast_2d(betas)
    quad = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", betas, sigma_hat, betas), 0.0))
    resid = np.abs(betas @ sigma_hat - mu_d).max(axis=1)
    if kappa > 0:
        need = resid / kappa - 1.0
    else:
        need = np.where(resid > 0, np.inf, -1.0)
    return np.maximum(np.maximum(quad, need), 0.0)


def panda_profile(sigma_hat, mu_d, kappa, c, betas):
    betas = np.atleast_2d(betas)
    tau = panda_tau_star(sigma_hat, mu_d, kappa, betas)
    return np.abs(betas).sum(axis=1) + c * tau ** 2


def panda_violation(sigma_hat, mu_d, kappa, beta, tau):
    """Largest violation of the original PANDA constraints at (beta, tau)."""
    beta = np.asarray(beta, dtype=float)
    resid = np.abs(sigma_hat @ beta - mu_d).max()
    quad = math.sqrt(max(beta @ sigma_hat @ beta, 0.0))
    return max(resid - kappa * (tau + 1.0), quad - tau, -tau, 0.0)


def lp_violation(g, lo, hi, beta):
    val = g @ np.asarray(beta, dtype=float)
    return float(max((lo - val).max(), (val - hi).max(), 0.0))


_GRID_POINTS = {1: 2001, 2: 201, 3: 41}


def zoom_grid_minimize(fn, p, half_width, rounds=80, points=None, tol=1e-12):
    """Minimize a convex function on [-half_width, half_width]^p by repeated dense grids.

    Each round evaluates a full tensor grid around the incumbent and halves the
    box, unless the incumbent sits on the box boundary, in which case the box is
    recentred without shrinking.
    """
    k = points or _GRID_POINTS[p]
    center = np.zeros(p)
    h = float(half_width)
    best_x, best_f = center, float(fn(center[None, :])[0])
    offsets = np.linspace(-1.0, 1.0, k)
    mesh = np.stack(np.meshgrid(*([offsets] * p), indexing="ij"), axis=-1).reshape(-1, p)
    for _ in range(rounds):
        pts = center + h * mesh
        vals = fn(pts)
        i = int(np.argmin(vals))
        if vals[i] <= best_f:
            best_x, best_f = pts[i], float(vals[i])
        on_edge = np.any(np.abs(mesh[i]) == 1.0)
        center = best_x
        if not on_edge:
            h /= 2
        if h < tol:
            break
    return best_f, best_x


def panda_oracle(stats, c, lam):
    """(objective, beta, tau) of PANDA by zooming grid search."""
    if stats.p > 3:
        raise InvalidInputError("grid oracle is limited to p <= 3")
    kappa = lam * stats.sigma_hat_max
    sigma, mu_d = np.asarray(stats.sigma_hat), np.asarray(stats.mu_hat_d)
    f0 = float(panda_profile(sigma, mu_d, kappa, c, np.zeros((1, stats.p)))[0])
    if not np.isfinite(f0):
        raise InvalidInputError("beta = 0 is not feasible (kappa = 0 with mu_d != 0)")
    if f0 == 0.0:
        return 0.0, np.zeros(stats.p), 0.0
    # every optimum satisfies ||beta||_1 <= f(0)
    fn = lambda b: panda_profile(sigma, mu_d, kappa, c, b)  # noqa: E731
    obj, beta = zoom_grid_minimize(fn, stats.p, f0)
    tau = float(panda_tau_star(sigma, mu_d, kappa, beta[None, :])[0])
    return obj, beta, tau


def panda_oracle_2d(sigma, mu_d, kappa, c, beta_range=(-3.0, 3.0), tau_range=(0.0, 4.0), step=1e-3):
    """Literal feasible-set grid over (beta, tau) for p = 1."""
    sigma, mu_d = float(np.ravel(sigma)[0]), float(np.ravel(mu_d)[0])
    betas = np.arange(round((beta_range[1] - beta_range[0]) / step) + 1) * step + beta_range[0]
    taus = np.arange(round((tau_range[1] - tau_range[0]) / step) + 1) * step + tau_range[0]
    best = (math.inf, None, None)
    for chunk in np.array_split(betas, max(1, len(betas) // 500)):
        b = chunk[:, None]
        t = taus[None, :]
        feas = (np.abs(sigma * b - mu_d) <= kappa * (t + 1) + 1e-15) & (np.sqrt(sigma) * np.abs(b) <= t + 1e-15)
        obj = np.where(feas, np.abs(b) + c * t ** 2, np.inf)
        i, j = np.unravel_index(np.argmin(obj), obj.shape)
        if obj[i, j] < best[0]:
            best = (float(obj[i, j]), float(chunk[i]), float(taus[j]))
    return best


def lp_vertex_oracle(g, lo, hi):
    """Exact min ||beta||_1 subject to lo <= g beta <= hi by vertex enumeration.

    Infinite entries of lo or hi make a row one-sided. Returns (objective,
    beta); raises if the polyhedron is empty.
    """
    g = np.atleast_2d(np.asarray(g, dtype=float))
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    p = g.shape[1]
    planes = [(g[i], lo[i]) for i in range(len(lo)) if np.isfinite(lo[i])]
    planes += [(g[i], hi[i]) for i in range(len(hi)) if np.isfinite(hi[i])]
    planes += [(np.eye(p)[j], 0.0) for j in range(p)]
    finite = np.concatenate([lo[np.isfinite(lo)], hi[np.isfinite(hi)]])
    slack = 1e-9 * (1.0 + np.abs(finite).max(initial=0.0))
    best = (math.inf, None)
    for combo in itertools.combinations(range(len(planes)), p):
        a = np.array([planes[k][0] for k in combo])
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        x = np.linalg.solve(a, np.array([planes[k][1] for k in combo]))
        val = g @ x
        if np.all(val >= lo - slack) and np.all(val <= hi + slack):
            obj = float(np.abs(x).sum())
            if obj < best[0]:
                best = (obj, x)
    if best[1] is None:
        raise InvalidInputError("LP is infeasible")
    return best


def lpd_oracle(stats, lam):
    bound = lam * stats.sigma_hat_max
    mu_d = np.asarray(stats.mu_hat_d)
    return lp_vertex_oracle(np.asarray(stats.sigma_hat), mu_d - bound, mu_d + bound)


def adalda_oracle(stats, lam):
    """(stage-2 objective, beta, delta_hat) of two-stage AdaLDA by vertex enumeration."""
    sigma, mu_d = np.asarray(stats.sigma_hat), np.asarray(stats.mu_hat_d)
    a = 4.0 * stats.sigma_hat_max * stats.log_p_over_n
    p = stats.p
    # |S b - mu_d| <= a (lam b'mu_d + 1), written as two one-sided linear systems
    upper = sigma - a * lam * np.outer(np.ones(p), mu_d)
    lower = sigma + a * lam * np.outer(np.ones(p), mu_d)
    g = np.vstack([upper, lower])
    lo = np.concatenate([np.full(p, -np.inf), mu_d - a])
    hi = np.concatenate([mu_d + a, np.full(p, np.inf)])
    _, beta1 = lp_vertex_oracle(g, lo, hi)
    delta_hat = math.sqrt(abs(beta1 @ mu_d))
    bound = a * math.sqrt(lam * delta_hat ** 2 + 1.0)
    obj, beta = lp_vertex_oracle(sigma, mu_d - bound, mu_d + bound)
    return obj, beta, delta_hat


@dataclass(frozen=True)
class OracleInstance:
    p: int
    samples: tuple
    c: float
    lam_fraction: float
    adalda_lam: float

    @property
    def stats(self):
        return compute_suff_stats(*self.samples)

    def panda_lam(self):
        st = self.stats
        return self.lam_fraction * np.abs(st.mu_hat_d).max() / st.sigma_hat_max


def random_instance(p, rng, n=12):
    """Small two-class sample with a visible mean gap and random tuning parameters.

    lambda is chosen so that kappa = lambda * sigma_max is a fraction in
    [0.1, 0.6] of ||mu_d||_inf, keeping the optimum away from the trivial zero.
    """
    a = rng.standard_normal((p, p))
    sigma = a @ a.T / p + 0.5 * np.eye(p)
    chol = np.linalg.cholesky(sigma)
    shift = rng.uniform(1.0, 2.5, size=p) * rng.choice([-1.0, 1.0], size=p)
    x0 = rng.standard_normal((n, p)) @ chol.T
    x1 = rng.standard_normal((n, p)) @ chol.T + shift
    return OracleInstance(p=p, samples=(x0, x1), c=float(rng.uniform(0.5, 5.0)),
                          lam_fraction=float(rng.uniform(0.1, 0.6)),
                          adalda_lam=float(rng.uniform(0.2, 2.0)))


def instances(n_per_p, p_values=(1, 2, 3), seed=0):
    rng = rng_for(seed)
    return [random_instance(p, rng) for p in p_values for _ in range(n_per_p)]


def relative_gap(value, reference):
    return abs(value - reference) / (1.0 + abs(reference))

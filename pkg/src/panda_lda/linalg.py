"""Small dense linear-algebra helpers shared by the model and the solver."""
import numpy as np

from .errors import InvalidInputError


def sym_sqrt(m, sym_tol=1e-10):
    """Symmetric PSD square root by eigendecomposition.

    Negative eigenvalues (round-off, or a genuinely indefinite input) are
    clamped to zero, so the result is always symmetric PSD.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.abs(m).max(initial=0.0), 1.0)
    if np.abs(m - m.T).max(initial=0.0) > sym_tol * scale:
        raise InvalidInputError("matrix is not symmetric")
    evals, evecs = np.linalg.eigh((m + m.T) / 2)
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    return (root + root.T) / 2


def power_iteration_norm2(matvec, rmatvec, dim, n_iter=30, seed=0):
    """Estimate the largest eigenvalue of A^T A from matvec callables."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(n_iter):
        y = rmatvec(matvec(x))
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        est = nrm
        x = y / nrm
    return est

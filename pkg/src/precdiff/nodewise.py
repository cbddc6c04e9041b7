"""Node-wise Lasso regressions and their residuals.

Each variable is regressed on all the others by minimising

    (1 / (2n)) * ||x_i - X_{-i} beta||^2 + lam * ||beta||_1

with cyclic coordinate descent on the Gram matrix. Coefficients are stored
per target row in slot order, i.e. row ``i`` of a ``d x (d-1)`` array holds
the coefficients of the variables ``0..d-1`` with ``i`` removed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, DegenerateColumnError, InvalidArgumentError
from .models import DataMatrix, as_array

TOL = 1e-7
MAX_SWEEPS = 1000
DEFAULT_KAPPA = 2.0


@dataclass(frozen=True)
class NodewiseFit:
    """Fitted node-wise regressions for one group.

    ``betas`` are on the original data scale. ``column_scales`` are the
    standard deviations divided out before fitting (ones when standardization
    is off); ``lambdas`` are on the fitting scale.
    """

    betas: np.ndarray
    residuals: np.ndarray
    lambdas: np.ndarray
    standardized: bool
    column_scales: np.ndarray

    @property
    def n(self) -> int:
        return self.residuals.shape[0]

    @property
    def d(self) -> int:
        return self.residuals.shape[1]


def center_and_scale(data, standardize=True):
    """Center columns and optionally scale them to unit variance (divisor n).

    Returns the transformed array and the per-column scales, so that
    ``centered * scales`` recovers the centered original data.
    """
    x = as_array(data)
    if x.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 observations")
    centered = x - x.mean(axis=0)
    scales = np.ones(x.shape[1])
    if standardize:
        sd = np.sqrt(np.mean(centered ** 2, axis=0))
        for j, s in enumerate(sd):
            # relative check: tiny but real spread must survive global rescaling
            if not s > 1e-12 * max(np.max(np.abs(x[:, j])), np.finfo(float).tiny):
                raise DegenerateColumnError(j)
        scales = sd
        centered = centered / sd
    if isinstance(data, DataMatrix):
        return DataMatrix(centered, data.group_label, data.names), scales
    return centered, scales


def default_lambda(data, i, kappa=DEFAULT_KAPPA):
    """Penalty ``kappa * sqrt(s_ii * log(d) / n)``, ``s_ii`` the second
    moment of the (already centered) column ``i``."""
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    x = as_array(data)
    n, d = x.shape
    s_ii = float(np.mean(x[:, i] ** 2))
    return kappa * np.sqrt(s_ii * np.log(d) / n)


@njit(cache=True, nogil=True)
def _cd_lasso(gram, corr, lam, tol, max_sweeps, beta):
    """Coordinate descent on the Gram form; ``beta`` is updated in place.

    Returns (sweeps used, final max KKT violation); sweeps is -1 when the
    budget ran out.
    """
    p = gram.shape[0]
    grad = corr - gram @ beta  # (1/n) X^T residual
    violation = np.inf
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(p):
            g_jj = gram[j, j]
            if g_jj <= 0.0:
                continue
            old = beta[j]
            z = grad[j] + g_jj * old
            if z > lam:
                new = (z - lam) / g_jj
            elif z < -lam:
                new = (z + lam) / g_jj
            else:
                new = 0.0
            change = new - old
            if change != 0.0:
                beta[j] = new
                for k in range(p):
                    grad[k] -= change * gram[k, j]
                if abs(change) > max_change:
                    max_change = abs(change)
        if max_change <= tol:
            # refresh to shed accumulated drift before certifying
            grad = corr - gram @ beta
            violation = 0.0
            for j in range(p):
                if gram[j, j] <= 0.0:
                    continue
                if beta[j] > 0.0:
                    v = abs(grad[j] - lam)
                elif beta[j] < 0.0:
                    v = abs(grad[j] + lam)
                else:
                    v = max(abs(grad[j]) - lam, 0.0)
                if v > violation:
                    violation = v
            if violation <= tol:
                return sweep + 1, violation
    return -1, violation


def _solve(gram, corr, lam, tol, max_sweeps):
    beta = np.zeros(gram.shape[0])
    sweeps, violation = _cd_lasso(np.ascontiguousarray(gram), np.ascontiguousarray(corr),
                                  float(lam), float(tol), int(max_sweeps), beta)
    if sweeps < 0:
        raise ConvergenceError(f"coordinate descent did not converge in {max_sweeps} sweeps",
                               violation)
    return beta


def lasso(x, y, lam, tol=TOL, max_sweeps=MAX_SWEEPS):
    """Plain Lasso of ``y`` on the columns of ``x`` (no intercept)."""
    if not lam > 0:
        raise InvalidArgumentError("lambda must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    return _solve(x.T @ x / n, x.T @ y / n, lam, tol, max_sweeps)


def fit_node_lasso(data, i, lam, tol=TOL, max_sweeps=MAX_SWEEPS):
    """Lasso coefficients of variable ``i`` on the remaining ``d - 1``
    variables, in slot order. ``data`` must already be centered."""
    x = as_array(data)
    if not lam > 0:
        raise InvalidArgumentError("lambda must be positive")
    n = x.shape[0]
    gram = x.T @ x / n
    return _node_from_gram(gram, i, lam, tol, max_sweeps)


def _node_from_gram(gram, i, lam, tol, max_sweeps):
    keep = np.arange(gram.shape[0]) != i
    return _solve(gram[np.ix_(keep, keep)], gram[keep, i], lam, tol, max_sweeps)


def coefficient_matrix(betas):
    """Expand ``d x (d-1)`` slot coefficients into a ``d x d`` matrix ``B``
    with ``B[target, predictor]`` and a zero diagonal."""
    betas = np.asarray(betas, dtype=float)
    d = betas.shape[0]
    if betas.shape != (d, d - 1):
        raise InvalidArgumentError(f"expected a {d}x{d - 1} coefficient array")
    full = np.zeros((d, d))
    off = ~np.eye(d, dtype=bool)
    full[off] = betas.ravel()
    return full


def slot_coefficients(full):
    """Inverse of :func:`coefficient_matrix`."""
    full = np.asarray(full, dtype=float)
    d = full.shape[0]
    return full[~np.eye(d, dtype=bool)].reshape(d, d - 1)


def compute_residuals(data, betas):
    """Residuals ``x_ki - mean_i - (x_k,-i - mean_-i)^T beta_i`` for every
    variable ``i``; ``betas`` on the scale of ``data``."""
    x = as_array(data)
    betas = np.asarray(betas, dtype=float)
    if not np.all(np.isfinite(betas)):
        raise InvalidArgumentError("coefficients contain non-finite values")
    centered = x - x.mean(axis=0)
    return centered - centered @ coefficient_matrix(betas).T


def fit_nodewise(data, standardize=True, kappa=DEFAULT_KAPPA, lambdas=None,
                 tol=TOL, max_sweeps=MAX_SWEEPS) -> NodewiseFit:
    """Fit all ``d`` node regressions of one group.

    ``lambdas`` overrides the default penalty rule; it may be a scalar or a
    length-``d`` vector on the fitting scale.
    """
    x = as_array(data)
    n, d = x.shape
    z, scales = center_and_scale(x, standardize)
    gram = z.T @ z / n
    if lambdas is None:
        lams = kappa * np.sqrt(np.diag(gram) * np.log(d) / n)
    else:
        lams = np.broadcast_to(np.asarray(lambdas, dtype=float), (d,)).copy()
    if not np.all(lams > 0):
        raise InvalidArgumentError("every penalty must be strictly positive")

    betas = np.empty((d, d - 1))
    for i in range(d):
        betas[i] = _node_from_gram(gram, i, lams[i], tol, max_sweeps)

    # back to the original scale: beta_ik * s_i / s_k
    full = coefficient_matrix(betas) * scales[:, None] / scales[None, :]
    betas = slot_coefficients(full)
    residuals = compute_residuals(x, betas)
    return NodewiseFit(betas=betas, residuals=residuals, lambdas=lams,
                       standardized=bool(standardize), column_scales=scales)

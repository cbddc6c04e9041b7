"""Bias-corrected residual statistics, the standardized difference matrix
and the (s0, p)-norm family.

Conventions: ``B = coefficient_matrix(betas)`` has ``B[target, predictor]``.
For ``i < j`` the coefficient of ``i`` in node ``j``'s regression is
``B[j, i]`` and the coefficient of ``j`` in node ``i``'s regression is
``B[i, j]``. Pairs ``i < j`` are enumerated in trivec order, which is what
``np.triu_indices(d, 1)`` yields.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVarianceError, InvalidArgumentError
from .nodewise import NodewiseFit, coefficient_matrix

INF = math.inf
# Above this order, powers are taken of |v| / max|v| to avoid overflow.
_SCALED_POWER = 16.0


@dataclass(frozen=True)
class GroupStats:
    r_tilde: np.ndarray
    r_hat: np.ndarray
    theta_hat: np.ndarray
    t: np.ndarray
    n: int
    betas: np.ndarray


@dataclass(frozen=True)
class WMatrix:
    w: np.ndarray
    trivec_cache: np.ndarray

    @property
    def d(self) -> int:
        return self.w.shape[0]


def pair_indices(d):
    """Index arrays ``(i, j)``, ``i < j``, in trivec order."""
    return np.triu_indices(d, 1)


def residual_cross_moments(residuals):
    e = np.asarray(residuals, dtype=float)
    if not np.all(np.isfinite(e)):
        raise InvalidArgumentError("residuals contain non-finite values")
    r = e.T @ e / e.shape[0]
    return 0.5 * (r + r.T)


def _corrected(r_tilde, full_b):
    diag = np.diag(r_tilde)
    # entry (i, j): r_ij + r_ii * B[j, i] + r_jj * B[i, j]
    corr = -(r_tilde + diag[:, None] * full_b.T + diag[None, :] * full_b)
    upper = np.triu(corr, 1)
    out = upper + upper.T
    out[np.diag_indices_from(out)] = diag
    return out


def bias_correct(r_tilde, betas):
    """Bias-corrected residual covariances; the diagonal passes through."""
    r_tilde = np.asarray(r_tilde, dtype=float)
    return _corrected(r_tilde, coefficient_matrix(betas))


def _positive_diagonal(r_hat):
    diag = np.diag(r_hat)
    floor = 1e-12 * max(np.max(np.abs(diag)), np.finfo(float).tiny)
    bad = np.flatnonzero(~(diag > floor))
    if bad.size:
        raise DegenerateVarianceError(int(bad[0]))
    return diag


def t_matrix(r_hat):
    r_hat = np.asarray(r_hat, dtype=float)
    diag = _positive_diagonal(r_hat)
    return r_hat / np.outer(diag, diag)


def theta_matrix(r_hat, betas, n):
    """Variance estimates of the T entries; the diagonal is left as NaN."""
    if n < 2:
        raise InvalidArgumentError("sample size must be at least 2")
    r_hat = np.asarray(r_hat, dtype=float)
    diag = _positive_diagonal(r_hat)
    full_b = coefficient_matrix(betas)
    # entry (i, j), i < j, uses the coefficient of i in node j: B[j, i]
    theta = (1.0 + full_b.T ** 2 * diag[:, None] / diag[None, :]) / (n * np.outer(diag, diag))
    upper = np.triu(theta, 1)
    out = upper + upper.T
    out[np.diag_indices_from(out)] = np.nan
    return out


def group_stats(fit: NodewiseFit) -> GroupStats:
    r_tilde = residual_cross_moments(fit.residuals)
    r_hat = bias_correct(r_tilde, fit.betas)
    return GroupStats(r_tilde=r_tilde, r_hat=r_hat, theta_hat=theta_matrix(r_hat, fit.betas, fit.n),
                      t=t_matrix(r_hat), n=fit.n, betas=fit.betas)


def w_matrix(t1, t2, theta1, theta2) -> WMatrix:
    t1, t2, theta1, theta2 = (np.asarray(a, dtype=float) for a in (t1, t2, theta1, theta2))
    if not (t1.shape == t2.shape == theta1.shape == theta2.shape) or t1.shape[0] != t1.shape[1]:
        raise InvalidArgumentError("T and theta matrices must share one square shape")
    d = t1.shape[0]
    i, j = pair_indices(d)
    vals = (t1[i, j] - t2[i, j]) / np.sqrt(theta1[i, j] + theta2[i, j])
    w = np.zeros((d, d))
    w[i, j] = vals
    w[j, i] = vals
    return WMatrix(w=w, trivec_cache=trivec(w))


def trivec(a):
    """Strict lower triangle read column by column."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
        raise InvalidArgumentError("trivec needs a square matrix with d >= 2")
    cols, rows = pair_indices(a.shape[0])
    return a[rows, cols]


def _check_p(p):
    p = float(p)
    if not p >= 1:
        raise InvalidArgumentError(f"norm order must be >= 1 or inf, got {p}")
    return p


def _clamp_s0(s0, size):
    s0 = int(s0)
    if s0 < 1:
        raise InvalidArgumentError("s0 must be at least 1")
    if s0 > size:
        warnings.warn(f"s0={s0} exceeds vector length {size}; clamped", stacklevel=3)
        return size
    return s0


def sorted_magnitudes(rows):
    """Absolute values of each row sorted in descending order."""
    a = np.abs(np.atleast_2d(np.asarray(rows, dtype=float)))
    return -np.sort(-a, axis=1)


def norm_table(mags, grid):
    """(s0, p)-norms of every row of ``mags`` for each grid entry.

    ``mags`` comes from :func:`sorted_magnitudes`; s0 values must already be
    within ``1..D``. Returns an array of shape ``(rows, len(grid))``.
    """
    mags = np.atleast_2d(mags)
    rows, size = mags.shape
    out = np.empty((rows, len(grid)))
    cache = {}
    for k, (s0, p) in enumerate(grid):
        if not 1 <= s0 <= size:
            raise InvalidArgumentError(f"s0={s0} outside 1..{size}")
        if math.isinf(p):
            out[:, k] = mags[:, 0]
            continue
        if p not in cache:
            cache[p] = _power_cumsums(mags, p)
        scale, sums = cache[p]
        out[:, k] = scale * sums[:, s0 - 1] ** (1.0 / p)
    return out


def _power_cumsums(mags, p):
    if p >= _SCALED_POWER:
        top = mags[:, :1]
        safe = np.where(top > 0, top, 1.0)
        return top[:, 0], np.cumsum((mags / safe) ** p, axis=1)
    return np.ones(mags.shape[0]), np.cumsum(mags ** p, axis=1)


def s0p_norm(v, s0, p):
    """l_p norm of the ``s0`` largest absolute entries of ``v``.

    ``p = inf`` gives the max absolute entry for every ``s0``.
    """
    p = _check_p(p)
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise InvalidArgumentError("empty vector")
    s0 = _clamp_s0(s0, v.size)
    return float(norm_table(sorted_magnitudes(v), [(s0, p)])[0, 0])


def max_statistic(w) -> float:
    vec = w.trivec_cache if isinstance(w, WMatrix) else trivec(w)
    return float(np.max(vec ** 2))

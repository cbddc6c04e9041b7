"""Multiplier bootstrap for the (s0, p)-norm statistics, recycled
bootstrap p-values and the adaptive combinations."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .nodewise import NodewiseFit, coefficient_matrix
from .rng import BOOTSTRAP, substream
from .stats import (GroupStats, _corrected, _positive_diagonal, norm_table, pair_indices,
                    sorted_magnitudes, w_matrix, WMatrix)

# Replicates are processed in fixed-size blocks; block boundaries depend only
# on the replicate index so results do not change with the thread count.
BLOCK = 64


@dataclass(frozen=True)
class BootstrapEnsemble:
    stats: np.ndarray      # B x K
    observed: np.ndarray   # K
    grid: tuple            # ((s0, p), ...)
    B: int
    seed: int

    def column(self, s0, p):
        return self.stats[:, self.grid.index((s0, p))]


def bootstrap_rtilde(residuals, r_tilde, eta):
    """One multiplier replicate of the residual cross-moments:
    ``(1/n) sum_k eta_k (e_ki e_kj - r_ij)``."""
    e = np.asarray(residuals, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n, d = e.shape
    if eta.shape != (n,):
        raise InvalidArgumentError(f"need {n} multipliers, got shape {eta.shape}")
    iu = np.triu_indices(d)
    centered = e[:, iu[0]] * e[:, iu[1]] - np.asarray(r_tilde)[iu]
    vals = eta @ centered / n
    out = np.zeros((d, d))
    out[iu] = vals
    out[iu[1], iu[0]] = vals
    return out


def bootstrap_rhat(r_tilde_b, betas):
    return _corrected(np.asarray(r_tilde_b, dtype=float), coefficient_matrix(betas))


def bootstrap_w(r_hat_b1, r_hat_b2, r_hat1, r_hat2, theta1, theta2) -> WMatrix:
    """Standardized bootstrap differences. Denominators use the original
    ``r_hat`` diagonals and ``theta``, not bootstrap versions."""
    d1 = _positive_diagonal(np.asarray(r_hat1))
    d2 = _positive_diagonal(np.asarray(r_hat2))
    t1 = np.asarray(r_hat_b1) / np.outer(d1, d1)
    t2 = np.asarray(r_hat_b2) / np.outer(d2, d2)
    return w_matrix(t1, t2, theta1, theta2)


class _GroupKernel:
    """Precomputed pieces for evaluating bootstrap T entries of one group in
    bulk, for all pairs i < j at once."""

    def __init__(self, fit: NodewiseFit, stats: GroupStats):
        e = fit.residuals
        self.n, d = e.shape
        i, j = pair_indices(d)
        diag = np.arange(d)
        rows = np.concatenate([i, diag])
        cols = np.concatenate([j, diag])
        # centered products, one column per (i < j) pair then the diagonal
        self.products = e[:, rows] * e[:, cols] - stats.r_tilde[rows, cols]
        self.npairs = i.size
        full_b = coefficient_matrix(fit.betas)
        self.i, self.j = i, j
        self.b_ij = full_b[j, i]   # coefficient of i in node j
        self.b_ji = full_b[i, j]   # coefficient of j in node i
        rd = _positive_diagonal(stats.r_hat)
        self.denom = rd[i] * rd[j]

    def t_boot(self, eta):
        """Bootstrap T entries for a block of multiplier rows (nb x n)."""
        rt = eta @ self.products / self.n
        off, diag = rt[:, :self.npairs], rt[:, self.npairs:]
        r_hat = -(off + diag[:, self.i] * self.b_ij + diag[:, self.j] * self.b_ji)
        return r_hat / self.denom


def normalize_grid(grid):
    out = []
    for s0, p in grid:
        p = float(p)
        if not p >= 1:
            raise InvalidArgumentError(f"norm order must be >= 1 or inf, got {p}")
        entry = (int(s0), p)
        if entry[0] < 1:
            raise InvalidArgumentError("s0 must be at least 1")
        if entry in out:
            raise InvalidArgumentError(f"duplicate grid entry {entry}")
        out.append(entry)
    if not out:
        raise InvalidArgumentError("grid must be nonempty")
    return tuple(out)


def _multipliers(seed, start, stop, group, n):
    return np.stack([substream(seed, BOOTSTRAP, b, group).standard_normal(n)
                     for b in range(start, stop)])


def run_ensemble(fit1, fit2, stats1, stats2, grid, B, seed, threads=1) -> BootstrapEnsemble:
    """Draw ``B`` multiplier replicates and evaluate every grid norm on each.

    Replicate ``b`` of group ``m`` uses the stream ``(seed, BOOTSTRAP, b, m)``.
    Only the ``B x K`` table of norms is kept.
    """
    grid = normalize_grid(grid)
    B = int(B)
    if B < 1:
        raise InvalidArgumentError("B must be at least 1")
    k1, k2 = _GroupKernel(fit1, stats1), _GroupKernel(fit2, stats2)
    if k1.npairs != k2.npairs:
        raise InvalidArgumentError("groups have different dimensions")
    size = k1.npairs
    if any(s0 > size for s0, _ in grid):
        raise InvalidArgumentError(f"grid s0 values must not exceed {size}")

    w = w_matrix(stats1.t, stats2.t, stats1.theta_hat, stats2.theta_hat)
    observed = norm_table(sorted_magnitudes(w.trivec_cache), grid)[0]
    scale = 1.0 / np.sqrt(stats1.theta_hat[k1.i, k1.j] + stats2.theta_hat[k1.i, k1.j])

    def block(start):
        stop = min(start + BLOCK, B)
        eta1 = _multipliers(seed, start, stop, 1, k1.n)
        eta2 = _multipliers(seed, start, stop, 2, k2.n)
        wb = (k1.t_boot(eta1) - k2.t_boot(eta2)) * scale
        return norm_table(sorted_magnitudes(wb), grid)

    starts = range(0, B, BLOCK)
    if threads and threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(s) for s in starts]
    return BootstrapEnsemble(stats=np.vstack(parts), observed=observed, grid=grid,
                             B=B, seed=int(seed))


def critical_value(column, alpha):
    """Smallest bootstrap value ``t`` whose empirical CDF exceeds ``1 - alpha``."""
    if not 0 < alpha < 1:
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    x = np.sort(np.asarray(column, dtype=float).ravel())
    if x.size == 0:
        raise InvalidArgumentError("empty bootstrap sample")
    cdf = np.searchsorted(x, x, side="right") / x.size
    return float(x[np.argmax(cdf > 1 - alpha)])


def p_value(observed, column):
    """Fraction ``#{N^b > N} / (B + 1)``."""
    x = np.asarray(column, dtype=float).ravel()
    if x.size == 0:
        raise InvalidArgumentError("empty bootstrap sample")
    return int(np.count_nonzero(x > observed)) / (x.size + 1)


def adaptive_statistic(p_values):
    p = np.asarray(p_values, dtype=float).ravel()
    if p.size == 0:
        raise InvalidArgumentError("no p-values to combine")
    return float(p.min())


def recycled_table(stats):
    """Leave-one-out p-values of every replicate against the others,
    ``#{b1 != b : N^b1 > N^b} / B``, per column. Shape ``B x K``."""
    stats = np.atleast_2d(np.asarray(stats, dtype=float))
    B = stats.shape[0]
    if B < 2:
        raise InvalidArgumentError("recycling needs at least 2 replicates")
    out = np.empty_like(stats)
    for k in range(stats.shape[1]):
        col = stats[:, k]
        # replicate b never exceeds itself, so counting over all b1 is the same
        greater = B - np.searchsorted(np.sort(col), col, side="right")
        out[:, k] = greater / B
    return out


def recycled_pvalues(ensemble, columns=None):
    """Bootstrap replicates of the adaptive statistic: the minimum recycled
    p-value over ``columns`` (grid entries or indices; default all)."""
    stats = ensemble.stats if isinstance(ensemble, BootstrapEnsemble) else np.asarray(ensemble)
    idx = _column_indices(ensemble, columns)
    return recycled_table(stats[:, idx]).min(axis=1)


def _column_indices(ensemble, columns):
    stats = ensemble.stats if isinstance(ensemble, BootstrapEnsemble) else np.atleast_2d(ensemble)
    if columns is None:
        return list(range(stats.shape[1]))
    idx = []
    for c in columns:
        if isinstance(c, tuple):
            c = ensemble.grid.index((int(c[0]), float(c[1])))
        idx.append(int(c))
    if not idx:
        raise InvalidArgumentError("no columns selected")
    return idx


def adaptive_p_value(n_ad, n_ad_boot):
    """``(#{N^b_ad <= N_ad} + 1) / (B + 1)``; small minima are extreme."""
    x = np.asarray(n_ad_boot, dtype=float).ravel()
    if x.size == 0:
        raise InvalidArgumentError("empty bootstrap sample")
    return (int(np.count_nonzero(x <= n_ad)) + 1) / (x.size + 1)


def doubly_adaptive(p_value_table, recycled):
    """Minimum p-value over the whole (p, s0) grid, calibrated against the
    same minimum taken over each recycled replicate.

    ``p_value_table`` holds the observed p-values (any shape), ``recycled``
    the matching per-replicate tables with a leading replicate axis.
    Returns ``(statistic, p_value)``.
    """
    observed = np.asarray(p_value_table, dtype=float)
    rec = np.asarray(recycled, dtype=float)
    if observed.size == 0:
        raise InvalidArgumentError("empty p-value table")
    rec = rec.reshape(rec.shape[0], -1)
    if rec.shape[1] != observed.size:
        raise InvalidArgumentError("recycled tables do not match the p-value table")
    stat = float(observed.min())
    return stat, adaptive_p_value(stat, rec.min(axis=1))


def decide(p_value, alpha):
    if not 0 < alpha < 1:
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    return bool(p_value <= alpha)


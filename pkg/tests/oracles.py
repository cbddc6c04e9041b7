"""Slow, independent reference implementations used only by the tests."""
import math

import numpy as np


def lasso_objective(x, y, beta, lam):
    n = x.shape[0]
    r = y - x @ beta
    return r @ r / (2 * n) + lam * np.abs(beta).sum()


def lasso_projected_gradient(x, y, lam, iters=50000, tol=1e-15):
    """Accelerated projected gradient on the split form beta = u - v,
    u, v >= 0, which turns the Lasso into a smooth bound-constrained QP."""
    n, p = x.shape
    gram = x.T @ x / n
    corr = x.T @ y / n
    step = 1.0 / (2.0 * np.linalg.eigvalsh(gram)[-1])
    u = np.zeros(p)
    v = np.zeros(p)
    yu, yv = u.copy(), v.copy()
    t = 1.0
    prev = np.inf
    for _ in range(iters):
        g = gram @ (yu - yv) - corr
        u_new = np.maximum(yu - step * (g + lam), 0.0)
        v_new = np.maximum(yv - step * (-g + lam), 0.0)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        mom = (t - 1) / t_new
        yu = u_new + mom * (u_new - u)
        yv = v_new + mom * (v_new - v)
        u, v, t = u_new, v_new, t_new
        obj = lasso_objective(x, y, u - v, lam)
        if abs(prev - obj) < tol:
            break
        prev = obj
    return u - v


def kkt_violation(x, y, beta, lam):
    n = x.shape[0]
    g = x.T @ (y - x @ beta) / n
    active = beta != 0
    viol = np.where(active, np.abs(g - lam * np.sign(beta)), np.maximum(np.abs(g) - lam, 0.0))
    return float(viol.max()) if viol.size else 0.0


def trivec_loop(a):
    d = a.shape[0]
    out = []
    for col in range(d - 1):
        for row in range(col + 1, d):
            out.append(a[row, col])
    return np.array(out)


def s0p_norm_sorted(v, s0, p):
    """Sort ascending, keep the last s0 magnitudes, accumulate."""
    mags = sorted(abs(float(x)) for x in v)
    if math.isinf(p):
        return mags[-1]
    top = mags[len(mags) - min(s0, len(mags)):]
    return math.fsum(m ** p for m in top) ** (1.0 / p)


def recycled_loop(stats):
    stats = np.asarray(stats)
    B, K = stats.shape
    out = np.zeros((B, K))
    for k in range(K):
        for b in range(B):
            count = 0
            for b1 in range(B):
                if b1 != b and stats[b1, k] > stats[b, k]:
                    count += 1
            out[b, k] = count / B
    return out


def critical_value_enum(column, alpha):
    vals = sorted(column)
    B = len(vals)
    for t in vals:
        if sum(1 for x in vals if x <= t) / B > 1 - alpha:
            return t
    raise AssertionError("no critical value")


def corrected_loop(r_tilde, betas):
    """Bias correction with explicit slot indexing: for i < j the
    coefficient of i in node j sits at slot i of row j, and the coefficient
    of j in node i at slot j - 1 of row i."""
    d = r_tilde.shape[0]
    out = np.zeros((d, d))
    for i in range(d):
        out[i, i] = r_tilde[i, i]
        for j in range(i + 1, d):
            val = -(r_tilde[i, j] + r_tilde[i, i] * betas[j, i] + r_tilde[j, j] * betas[i, j - 1])
            out[i, j] = out[j, i] = val
    return out


def residuals_loop(x, betas):
    n, d = x.shape
    means = x.mean(axis=0)
    out = np.zeros((n, d))
    for k in range(n):
        for i in range(d):
            others = [m for m in range(d) if m != i]
            fit = sum((x[k, m] - means[m]) * betas[i, s] for s, m in enumerate(others))
            out[k, i] = x[k, i] - means[i] - fit
    return out


def population_betas(omega):
    """True node regression coefficients in slot layout."""
    d = omega.shape[0]
    betas = np.zeros((d, d - 1))
    for i in range(d):
        others = [m for m in range(d) if m != i]
        betas[i] = -omega[others, i] / omega[i, i]
    return betas

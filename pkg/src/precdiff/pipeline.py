"""End-to-end two-sample test."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bootstrap import (BootstrapEnsemble, adaptive_p_value, critical_value, decide,
                        doubly_adaptive, p_value, recycled_table, run_ensemble)
from .errors import InvalidArgumentError
from .models import DataMatrix, as_array
from .nodewise import NodewiseFit, fit_nodewise
from .report import (AdaptiveRecord, CombinedRecord, EntryRecord, TestConfig, TestReport,
                     provenance)
from .stats import GroupStats, WMatrix, group_stats, max_statistic, w_matrix

MAX_ENTRY = (1, math.inf)


@dataclass(frozen=True)
class TestRun:
    """Report plus the intermediate objects it was computed from."""

    report: TestReport
    fits: tuple
    stats: tuple
    w: WMatrix
    ensemble: BootstrapEnsemble

    __test__ = False


def effective_s0_grid(s0_grid, size):
    """Clamp s0 values to the number of pairs and drop resulting duplicates."""
    out = []
    for s0 in s0_grid:
        if s0 > size:
            warnings.warn(f"s0={s0} exceeds {size} pairs; clamped", stacklevel=3)
            s0 = size
        if s0 not in out:
            out.append(s0)
    return tuple(out)


def test_grid(config: TestConfig, size):
    """Ensemble grid: every (s0, p) in S x P, plus the max-type entry."""
    s0s = effective_s0_grid(config.s0_grid, size)
    grid = [(s0, p) for s0 in s0s for p in config.p_grid]
    if MAX_ENTRY not in grid:
        grid.append(MAX_ENTRY)
    return s0s, tuple(grid)


test_grid.__test__ = False


def _check_groups(group1, group2):
    x1, x2 = as_array(group1), as_array(group2)
    for x in (x1, x2):
        DataMatrix(x)  # validates shape and finiteness
    if x1.shape[1] != x2.shape[1]:
        raise InvalidArgumentError(
            f"groups have different numbers of variables: {x1.shape[1]} vs {x2.shape[1]}")
    return x1, x2


def run_test_detailed(group1, group2, config: TestConfig | None = None) -> TestRun:
    config = config or TestConfig()
    x1, x2 = _check_groups(group1, group2)
    d = x1.shape[1]
    size = d * (d - 1) // 2

    fits = tuple(fit_nodewise(x, standardize=config.standardize, kappa=config.kappa,
                              tol=config.lasso_tol)
                 for x in (x1, x2))
    stats = tuple(group_stats(f) for f in fits)
    w = w_matrix(stats[0].t, stats[1].t, stats[0].theta_hat, stats[1].theta_hat)

    s0s, grid = test_grid(config, size)
    ens = run_ensemble(fits[0], fits[1], stats[0], stats[1], grid, config.B, config.seed,
                       threads=config.threads)
    report = build_report(ens, s0s, config, w, n1=x1.shape[0], n2=x2.shape[0], d=d,
                          names=_names(group1))
    return TestRun(report=report, fits=fits, stats=stats, w=w, ensemble=ens)


def run_test(group1, group2, config: TestConfig | None = None) -> TestReport:
    """Test equality of the two groups' precision matrices."""
    return run_test_detailed(group1, group2, config).report


def _names(group):
    if isinstance(group, DataMatrix) and group.names is not None:
        return list(group.names)
    return None


def build_report(ens: BootstrapEnsemble, s0s, config: TestConfig, w: WMatrix, **meta):
    alpha = config.alpha
    pvals = np.array([p_value(ens.observed[k], ens.stats[:, k]) for k in range(len(ens.grid))])

    def entry(k):
        s0, p = ens.grid[k]
        return EntryRecord(s0=s0, p=p, statistic=float(ens.observed[k]),
                           critical_value=critical_value(ens.stats[:, k], alpha),
                           p_value=float(pvals[k]), reject=decide(pvals[k], alpha))

    family = [k for k, (s0, p) in enumerate(ens.grid) if s0 in s0s and p in config.p_grid]
    entries = tuple(entry(k) for k in family)
    max_test = entry(ens.grid.index(MAX_ENTRY))

    recycled = recycled_table(ens.stats) if ens.B >= 2 else None
    adaptive = []
    for s0 in s0s:
        cols = [ens.grid.index((s0, p)) for p in config.p_grid]
        stat = float(pvals[cols].min())
        if recycled is None:
            pv = 1.0  # no replicate to recycle against
        else:
            pv = adaptive_p_value(stat, recycled[:, cols].min(axis=1))
        adaptive.append(AdaptiveRecord(s0=s0, statistic=stat, p_value=pv,
                                       reject=decide(pv, alpha)))

    doubly = None
    if len(s0s) > 1:
        if recycled is None:
            stat, pv = float(pvals[family].min()), 1.0
        else:
            stat, pv = doubly_adaptive(pvals[family], recycled[:, family])
        doubly = CombinedRecord(statistic=stat, p_value=pv, reject=decide(pv, alpha))

    meta = {k: v for k, v in meta.items() if v is not None}
    metadata = provenance(config, s0_grid_effective=list(s0s), **meta)
    return TestReport(entries=entries, adaptive=tuple(adaptive), max_test=max_test,
                      max_statistic=max_statistic(w), doubly_adaptive=doubly,
                      metadata=metadata)

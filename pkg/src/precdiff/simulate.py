"""Monte Carlo size and power experiments on the simulation models."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .models import (ModelId, build_alternative_pair, build_base_precision,
                     precision_to_covariance, sample_gaussian)
from .pipeline import run_test
from .report import TestConfig, TestReport, format_p
from .rng import DATA, MODEL, substream


@dataclass(frozen=True)
class Truth:
    omega1: np.ndarray
    omega2: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray


def make_truth(model, d, m_t, r, seed) -> Truth:
    """Population precision matrices for one configuration.

    ``r == 0`` is the null: both groups share the base matrix. Otherwise the
    base is perturbed as in :func:`build_alternative_pair`. The base pattern
    and the perturbed locations come from dedicated model streams, so they
    are shared by every ``r`` under one seed.
    """
    base = build_base_precision(model, d, substream(seed, MODEL, 0))
    if r == 0:
        omega1 = omega2 = base.omega
    else:
        pair = build_alternative_pair(base, m_t, r, substream(seed, MODEL, 1))
        omega1, omega2 = pair.omega1, pair.omega2
    return Truth(omega1, omega2, precision_to_covariance(omega1), precision_to_covariance(omega2))


def rep_seed(seed, rep):
    """Seed for the bootstrap of replication ``rep``."""
    state = np.random.SeedSequence([int(seed), DATA, int(rep)]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def replicate_data(truth: Truth, n1, n2, seed, rep):
    x1 = sample_gaussian(n1, truth.sigma1, substream(seed, DATA, rep, 1), group_label=1)
    x2 = sample_gaussian(n2, truth.sigma2, substream(seed, DATA, rep, 2), group_label=2)
    return x1, x2


def variant_names(report: TestReport):
    """Test variants in report order: max-type, adaptive per s0, doubly
    tuned (when present), then every individual (s0, p) entry."""
    names = ["max"] + [f"ad_s{a.s0}" for a in report.adaptive]
    if report.doubly_adaptive is not None:
        names.append("tn_ad")
    names += [f"N_s{e.s0}_p{format_p(e.p)}" for e in report.entries]
    return names


def decisions(report: TestReport):
    flags = [report.max_test.reject] + [a.reject for a in report.adaptive]
    if report.doubly_adaptive is not None:
        flags.append(report.doubly_adaptive.reject)
    flags += [e.reject for e in report.entries]
    return dict(zip(variant_names(report), flags))


@dataclass(frozen=True)
class SimulationSummary:
    model: str
    d: int
    n1: int
    n2: int
    m_t: int
    r: float
    reps: int
    seed: int
    frequencies: dict

    def row(self):
        return {"model": self.model, "d": self.d, "n1": self.n1, "n2": self.n2,
                "m_t": self.m_t, "r": self.r, "reps": self.reps, "seed": self.seed,
                **self.frequencies}


def simulate(model, d, n1, n2, m_t, r, config: TestConfig, reps, progress=None):
    """Rejection frequency of every test variant over ``reps`` independent
    data sets. Replications run on ``config.threads`` workers; each uses
    its own data and bootstrap streams, so the result does not depend on
    the worker count."""
    model = ModelId.parse(model)
    truth = make_truth(model, d, m_t, r, config.seed)

    def one(rep):
        x1, x2 = replicate_data(truth, n1, n2, config.seed, rep)
        cfg = replace(config, seed=rep_seed(config.seed, rep), threads=1)
        out = decisions(run_test(x1, x2, cfg))
        if progress is not None:
            progress(rep)
        return out

    if config.threads > 1 and reps > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(rep) for rep in range(reps)]

    names = list(results[0])
    freqs = {k: sum(res[k] for res in results) / reps for k in names}
    return SimulationSummary(model=model.value, d=d, n1=n1, n2=n2, m_t=m_t, r=float(r),
                             reps=reps, seed=config.seed, frequencies=freqs)


def power_curve(model, d, n, m_t, r_list, config: TestConfig, reps, n2=None, progress=None):
    """One summary per signal magnitude in ``r_list`` (ascending)."""
    r_list = [float(r) for r in r_list]
    if not r_list or any(b < a for a, b in zip(r_list, r_list[1:])):
        raise ValueError("r_list must be nonempty and ascending")
    return [simulate(model, d, n, n2 or n, m_t, r, config, reps, progress=progress)
            for r in r_list]


def curve_csv(summaries, out=None):
    """Write ``r, m_t`` and one rejection-frequency column per variant."""
    names = list(summaries[0].frequencies)
    buf = out or io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["r", "m_t", *names])
    for s in summaries:
        writer.writerow([_num(s.r), s.m_t, *(_num(s.frequencies[k]) for k in names)])
    return buf.getvalue() if out is None else None


def summary_csv(summaries, out=None):
    """Full machine-readable rows: configuration columns then variants."""
    rows = [s.row() for s in summaries]
    buf = out or io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _num(v) for k, v in row.items()})
    return buf.getvalue() if out is None else None


def _num(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return v

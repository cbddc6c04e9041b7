"""Test configuration and the JSON report document.

Norm orders are serialized as numbers except infinity, which is the string
``"inf"``. ``TestReport.from_json(report.to_json()) == report`` holds.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields

from . import __version__
from .errors import InvalidArgumentError

SCHEMA = "precdiff.report/1"

DEFAULT_P = (1.0, 2.0, 3.0, 4.0, 5.0, math.inf)
DEFAULT_S0 = (10, 100, 500, 1000)


def parse_p(token):
    if isinstance(token, str):
        token = token.strip().lower()
        if token in ("inf", "infinity"):
            return math.inf
    try:
        p = float(token)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"invalid norm order {token!r}") from None
    if not p >= 1:
        raise InvalidArgumentError(f"norm order must be >= 1 or inf, got {token!r}")
    return p


def format_p(p):
    if math.isinf(p):
        return "inf"
    return int(p) if float(p).is_integer() else p


@dataclass(frozen=True)
class TestConfig:
    p_grid: tuple = DEFAULT_P
    s0_grid: tuple = DEFAULT_S0
    B: int = 1000
    alpha: float = 0.05
    seed: int = 0
    kappa: float = 2.0
    standardize: bool = True
    threads: int = 1
    lasso_tol: float = 1e-7

    __test__ = False  # not a pytest class

    def __post_init__(self):
        p_grid = tuple(parse_p(p) for p in self.p_grid)
        s0_grid = tuple(int(s) for s in self.s0_grid)
        if not p_grid or len(set(p_grid)) != len(p_grid):
            raise InvalidArgumentError("p grid must be nonempty without duplicates")
        if not s0_grid or min(s0_grid) < 1 or len(set(s0_grid)) != len(s0_grid):
            raise InvalidArgumentError("s0 grid must be nonempty, >= 1, without duplicates")
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError("alpha must lie in (0, 1)")
        if int(self.B) < 1:
            raise InvalidArgumentError("B must be at least 1")
        if not self.kappa > 0:
            raise InvalidArgumentError("kappa must be positive")
        if int(self.seed) < 0:
            raise InvalidArgumentError("seed must be non-negative")
        if not self.lasso_tol > 0:
            raise InvalidArgumentError("lasso_tol must be positive")
        threads = self.threads
        if isinstance(threads, str) and threads.strip().lower() == "auto":
            threads = os.cpu_count() or 1
        try:
            threads = int(threads)
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"threads must be a count or 'auto', got {self.threads!r}") from None
        if threads < 1:
            raise InvalidArgumentError("threads must be at least 1")
        object.__setattr__(self, "p_grid", p_grid)
        object.__setattr__(self, "s0_grid", s0_grid)
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "threads", threads)
        object.__setattr__(self, "standardize", bool(self.standardize))

    def to_dict(self):
        out = asdict(self)
        out["p_grid"] = [format_p(p) for p in self.p_grid]
        out["s0_grid"] = list(self.s0_grid)
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(**{f.name: data[f.name] for f in fields(cls) if f.name in data})


@dataclass(frozen=True)
class EntryRecord:
    s0: int
    p: float
    statistic: float
    critical_value: float
    p_value: float
    reject: bool


@dataclass(frozen=True)
class AdaptiveRecord:
    s0: int
    statistic: float
    p_value: float
    reject: bool


@dataclass(frozen=True)
class CombinedRecord:
    statistic: float
    p_value: float
    reject: bool


@dataclass(frozen=True)
class TestReport:
    entries: tuple
    adaptive: tuple
    max_test: EntryRecord
    max_statistic: float
    doubly_adaptive: CombinedRecord | None
    metadata: dict = field(default_factory=dict)

    __test__ = False

    def entry(self, s0, p):
        for e in self.entries:
            if e.s0 == s0 and e.p == p:
                return e
        raise KeyError((s0, p))

    def adaptive_for(self, s0):
        for a in self.adaptive:
            if a.s0 == s0:
                return a
        raise KeyError(s0)

    def to_dict(self):
        def entry(e):
            out = asdict(e)
            out["p"] = format_p(e.p)
            return out

        return {
            "schema": SCHEMA,
            "metadata": self.metadata,
            "entries": [entry(e) for e in self.entries],
            "max_test": entry(self.max_test),
            "max_statistic": self.max_statistic,
            "adaptive": [asdict(a) for a in self.adaptive],
            "doubly_adaptive": None if self.doubly_adaptive is None else asdict(self.doubly_adaptive),
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema") != SCHEMA:
            raise InvalidArgumentError(f"unsupported report schema {data.get('schema')!r}")

        def entry(e):
            return EntryRecord(**{**e, "p": parse_p(e["p"])})

        da = data.get("doubly_adaptive")
        return cls(
            entries=tuple(entry(e) for e in data["entries"]),
            adaptive=tuple(AdaptiveRecord(**a) for a in data["adaptive"]),
            max_test=entry(data["max_test"]),
            max_statistic=data["max_statistic"],
            doubly_adaptive=None if da is None else CombinedRecord(**da),
            metadata=data.get("metadata", {}),
        )

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def provenance(config: TestConfig, **extra):
    meta = {"version": __version__, "lambda_rule": "kappa*sqrt(s_ii*log(d)/n)"}
    meta.update(config.to_dict())
    meta.update(extra)
    return meta

"""Precision-matrix models, perturbed alternatives and Gaussian sampling
for simulation experiments."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import InternalConsistencyError, InvalidArgumentError

SHIFT = 0.05


class ModelId(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"
    MODEL3 = "model3"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace(" ", "").replace("_", "")
        aliases = {"1": "model1", "2": "model2", "3": "model3"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidArgumentError(f"unknown model {value!r}") from None


@dataclass(frozen=True)
class PrecisionModel:
    omega: np.ndarray
    model_id: ModelId = ModelId.CUSTOM

    @property
    def d(self) -> int:
        return self.omega.shape[0]


@dataclass(frozen=True)
class AlternativePair:
    omega1: np.ndarray
    omega2: np.ndarray
    gamma: np.ndarray
    delta: float
    m_t: int
    r: float


@dataclass(frozen=True)
class DataMatrix:
    """Observations of one group, rows are samples."""

    values: np.ndarray
    group_label: int = 1
    names: tuple | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidArgumentError("data must be a 2-d array")
        n, d = values.shape
        if n < 2 or d < 2:
            raise InvalidArgumentError(
                f"need at least 2 observations and 2 variables, got {n}x{d}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("data contains non-finite entries")
        if self.names is not None and len(self.names) != d:
            raise InvalidArgumentError("number of names does not match columns")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def as_array(data) -> np.ndarray:
    if isinstance(data, DataMatrix):
        return data.values
    return np.asarray(data, dtype=float)


def _check_symmetric(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"{name} must be square")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise InvalidArgumentError(f"{name} is not symmetric")
    return a


def min_eigenvalue(a) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    a = _check_symmetric(a)
    return float(np.linalg.eigvalsh(a)[0])


def _shifted_normalized(a):
    # (A + delta I) / (1 + delta) with delta = |lambda_min(A)| + 0.05
    delta = abs(min_eigenvalue(a)) + SHIFT
    return (a + delta * np.eye(a.shape[0])) / (1.0 + delta)


def _bernoulli_upper(d, prob, rng):
    iu = np.triu_indices(d, 1)
    upper = np.zeros((d, d))
    upper[iu] = rng.binomial(1, prob, size=iu[0].size)
    return upper + upper.T


def build_base_precision(model_id, d: int, rng) -> PrecisionModel:
    """Build the base precision matrix of one of the simulation models.

    Model 1 and Model 3 draw their random off-diagonal pattern from ``rng``;
    Model 2 is deterministic.
    """
    model_id = ModelId.parse(model_id)
    if model_id is ModelId.CUSTOM:
        raise InvalidArgumentError("custom models are built with PrecisionModel directly")
    d = int(d)
    if d < 2:
        raise InvalidArgumentError("dimension must be at least 2")

    if model_id is ModelId.MODEL1:
        star = np.eye(d) + 0.5 * _bernoulli_upper(d, 0.5, rng)
        omega = _shifted_normalized(star)
    elif model_id is ModelId.MODEL2:
        sigma_star = np.eye(d)
        for k in range(d // 2):
            sigma_star[2 * k, 2 * k + 1] = sigma_star[2 * k + 1, 2 * k] = 0.5
        omega = _inverse_pd(_shifted_normalized(sigma_star))
    else:
        if d < 20 or d % 20:
            raise InvalidArgumentError("Model 3 requires d to be a positive multiple of 20")
        pattern = _bernoulli_upper(d, 0.3, rng)
        for k in range(d // 20):
            hub = 20 * k
            pattern[hub, hub + 1:hub + 20] = 1.0
            pattern[hub + 1:hub + 20, hub] = 1.0
        star = np.eye(d) + 0.5 * pattern
        omega = _shifted_normalized(star)

    omega = 0.5 * (omega + omega.T)
    try:
        np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise InternalConsistencyError(
            f"{model_id.value} precision matrix is not positive definite") from None
    return PrecisionModel(omega=omega, model_id=model_id)


def build_alternative_pair(base: PrecisionModel, m_t: int, r: float, rng) -> AlternativePair:
    """Perturb ``base`` by a symmetric matrix with ``m_t`` entries equal to ``r``.

    ``m_t / 2`` upper-triangle locations are drawn without replacement and
    mirrored. Both returned matrices are shifted by the same ``delta`` so that
    the perturbed one stays positive definite.
    """
    omega = np.asarray(base.omega if isinstance(base, PrecisionModel) else base, dtype=float)
    d = omega.shape[0]
    m_t = int(m_t)
    if m_t % 2 or m_t < 2 or m_t > d * (d - 1):
        raise InvalidArgumentError(
            f"m_t must be even and within [2, {d * (d - 1)}], got {m_t}")
    if r < 0:
        raise InvalidArgumentError("signal magnitude r must be non-negative")

    iu = np.triu_indices(d, 1)
    picks = rng.choice(iu[0].size, size=m_t // 2, replace=False)
    gamma = np.zeros((d, d))
    gamma[iu[0][picks], iu[1][picks]] = r
    gamma[iu[1][picks], iu[0][picks]] = r

    delta = abs(min_eigenvalue(omega + gamma)) + SHIFT
    omega1 = omega + delta * np.eye(d)
    omega2 = omega1 + gamma
    for mat in (omega1, omega2):
        try:
            np.linalg.cholesky(mat)
        except np.linalg.LinAlgError:
            raise InternalConsistencyError("shifted alternative is not positive definite") from None
    return AlternativePair(omega1=omega1, omega2=omega2, gamma=gamma,
                           delta=float(delta), m_t=m_t, r=float(r))


def _inverse_pd(a):
    try:
        factor = scipy.linalg.cho_factor(a, lower=True)
    except np.linalg.LinAlgError:
        raise InvalidArgumentError("matrix is not positive definite") from None
    inv = scipy.linalg.cho_solve(factor, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)


def precision_to_covariance(model) -> np.ndarray:
    omega = model.omega if isinstance(model, PrecisionModel) else model
    return _inverse_pd(_check_symmetric(omega, "precision matrix"))


def sample_gaussian(n: int, sigma, rng, group_label: int = 1) -> DataMatrix:
    """Draw ``n`` rows from N(0, sigma) as ``z @ L.T`` with ``L`` the lower
    Cholesky factor."""
    sigma = _check_symmetric(sigma, "covariance")
    if n < 2:
        raise InvalidArgumentError("need at least 2 observations")
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise InvalidArgumentError("covariance is not positive definite") from None
    z = rng.standard_normal((int(n), sigma.shape[0]))
    return DataMatrix(z @ chol.T, group_label=group_label)

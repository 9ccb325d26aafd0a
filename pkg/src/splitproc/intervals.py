"""
Przedziały ufności dla P_j (metoda delta na skali logitowej).

    γ = logit(P)
    ∇γ = (∂P/∂β, ∂P/∂σ²) / (P(1-P))
    σ²_γ = ∇γᵀ Σ ∇γ,     Σ = kowariancja (β̂_j, σ̂²_k) z podzbioru k

    CI = logistic(γ̂ ± z·σ_γ)

Σ pochodzi z (-H)⁻¹ dopasowania podzbioru. Hesjan jest liczony po
log_sigma, więc stosujemy jakobian σ² = exp(2·log_sigma):

    J = diag(1, 2σ²),   Σ = J · (-H)⁻¹_{[β_j, log σ]} · J

ŁĄCZENIE W PRZEDZIAŁÓW:
    average      -> (średnia dolnych, średnia górnych)
    union        -> (min dolnych, max górnych)
    intersection -> (max dolnych, min górnych); pusty przekrój jest
                    zwijany do punktu leżącego w przedziale średnim
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg
from scipy.special import expit, logit
from scipy.stats import norm

from ..core.errors import InvalidArgumentError
from ..core.rng import StreamRNG
from ..model.fitting import FitResult
from .partition import CIMode
from .probability import probability_derivatives

# P̂ bliżej 0/1 niż to -> przedział zdegenerowany
DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class ConfidenceInterval:
    """
    Przedział [lower, upper] ⊆ [0, 1].

    Attributes:
        lower (float): Dolna granica
        upper (float): Górna granica
        degenerate (bool): Przedział zwinięty do punktu (separacja,
            P̂ ∈ {0, 1} albo pusty przekrój)
    """
    lower: float
    upper: float
    degenerate: bool = False

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise InvalidArgumentError(f"Invalid interval [{self.lower}, {self.upper}]")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @classmethod
    def point(cls, value: float) -> "ConfidenceInterval":
        """Zdegenerowany przedział [value, value]."""
        value = float(min(max(value, 0.0), 1.0))
        return cls(value, value, degenerate=True)


def z_value(level: float) -> float:
    """Kwantyl dwustronny N(0,1) dla poziomu ufności."""
    if not 0.0 < level < 1.0:
        raise InvalidArgumentError(f"Confidence level must be in (0, 1), got {level}")
    return float(norm.ppf(1.0 - (1.0 - level) / 2.0))


def parameter_covariance(fit: FitResult) -> np.ndarray:
    """
    (-H)⁻¹ po (β..., log_sigma) z zerami w wierszach klastrów z separacją.

    Gdy -H jest osobliwy, używana jest pseudoodwrotność.
    """
    n = len(fit.hessian)
    free = np.ones(n, dtype=bool)
    for cid in fit.separation_flags:
        free[fit.position(cid)] = False
    neg = -fit.hessian[np.ix_(free, free)]
    try:
        inverse = linalg.inv(neg, check_finite=True)
        if not np.all(np.isfinite(inverse)):
            raise linalg.LinAlgError("non-finite inverse")
    except (linalg.LinAlgError, ValueError):
        inverse = linalg.pinv(neg)
    cov = np.zeros((n, n))
    cov[np.ix_(free, free)] = 0.5 * (inverse + inverse.T)
    return cov


def covariance_block(fit: FitResult, cluster_id: int, covariance: np.ndarray = None) -> np.ndarray:
    """
    Macierz 2×2 kowariancji (β̂_j, σ̂²) z dopasowania.

    Args:
        fit: Dopasowanie zawierające klaster
        cluster_id: Klaster j
        covariance: Wynik parameter_covariance(fit) (żeby nie odwracać
            hesjanu dla każdego klastra osobno)
    """
    if covariance is None:
        covariance = parameter_covariance(fit)
    pos = fit.position(cluster_id)
    idx = [pos, len(covariance) - 1]
    block = covariance[np.ix_(idx, idx)]
    jac = np.diag([1.0, 2.0 * fit.sigma2])
    return jac @ block @ jac


def delta_method_ci(
    beta_hat: float,
    sigma2_hat: float,
    cov2x2: np.ndarray,
    q: int,
    level: float,
    rng: StreamRNG,
) -> ConfidenceInterval:
    """
    Przedział ufności dla P_j metodą delta na skali logitowej.

    Pochodne P liczone całkowaniem stochastycznym z Q losowań.

    Raises:
        InvalidArgumentError: level ∉ (0, 1), Q < 1, σ² < 0

    Example:
        >>> ci = delta_method_ci(1.0, 4.0, np.zeros((2, 2)), 1000, 0.95, StreamRNG(3))
        >>> ci.lower == ci.upper
        True
    """
    z = z_value(level)
    if q < 1:
        raise InvalidArgumentError(f"Number of draws must be ≥ 1, got {q}")
    p, d_beta, d_sigma2 = probability_derivatives(beta_hat, sigma2_hat, rng.standard_normal(q))
    return interval_from_derivatives(p, d_beta, d_sigma2, np.asarray(cov2x2, dtype=float), z)


def interval_from_derivatives(
    p: float,
    d_beta: float,
    d_sigma2: float,
    cov2x2: np.ndarray,
    z: float,
) -> ConfidenceInterval:
    """Przedział z gotowych (P̂, ∂P/∂β, ∂P/∂σ²) i kwantyla z."""
    if p <= DEGENERATE_EPS:
        return ConfidenceInterval.point(0.0)
    if p >= 1.0 - DEGENERATE_EPS:
        return ConfidenceInterval.point(1.0)
    grad = np.array([d_beta, d_sigma2]) / (p * (1.0 - p))
    var = max(float(grad @ cov2x2 @ grad), 0.0)
    gamma = float(logit(p))
    half = z * np.sqrt(var)
    lower, upper = float(expit(gamma - half)), float(expit(gamma + half))
    if half == 0.0:
        lower = upper = p
    return ConfidenceInterval(lower, upper)


def combine_cis(intervals: Sequence[ConfidenceInterval], mode: CIMode) -> ConfidenceInterval:
    """
    Łączy W przedziałów w jeden.

    Raises:
        InvalidArgumentError: Pusta lista

    Example:
        >>> cis = [ConfidenceInterval(0.1, 0.5), ConfidenceInterval(0.3, 0.7)]
        >>> combine_cis(cis, CIMode.UNION)
        ConfidenceInterval(lower=0.1, upper=0.7, degenerate=False)
    """
    if not intervals:
        raise InvalidArgumentError("Cannot combine an empty list of intervals")
    mode = CIMode(mode)
    lowers = np.array([ci.lower for ci in intervals])
    uppers = np.array([ci.upper for ci in intervals])
    all_degenerate = all(ci.degenerate for ci in intervals)

    avg_lower, avg_upper = float(np.mean(lowers)), float(np.mean(uppers))
    # średnia może wyjść o ulp poza [min, max]
    avg_lower = min(max(avg_lower, float(lowers.min())), float(lowers.max()))
    avg_upper = min(max(avg_upper, float(uppers.min())), float(uppers.max()))

    if mode is CIMode.AVERAGE:
        return ConfidenceInterval(avg_lower, max(avg_upper, avg_lower), all_degenerate)
    if mode is CIMode.UNION:
        return ConfidenceInterval(float(lowers.min()), float(uppers.max()), all_degenerate)

    lower, upper = float(lowers.max()), float(uppers.min())
    if lower <= upper:
        return ConfidenceInterval(lower, upper, all_degenerate)
    point = min(max(0.5 * (lower + upper), avg_lower), avg_upper)
    return ConfidenceInterval(point, point, degenerate=True)

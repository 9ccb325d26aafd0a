"""
Dopasowanie modelu metodą największej wiarygodności (Newton-Raphson).

ALGORYTM:
═══════════════════════════════════════════════════════════════════

    θ = (β_free, log_sigma)

    1. Start: β_j⁰ = logit((s_j + 0.5) / (m_j + 1))   (poprawka Haldane'a)
              log_sigma⁰ = options.log_sigma_init
    2. Klastry z separacją (same 0 / same 1) -> β_j = ±β_cap na stałe,
       poza wektorem θ i poza testem zbieżności
    3. Iteracja:
         g = ∇ℓ(θ), H = ∇²ℓ(θ)                 (analitycznie)
         jeśli max|g| ≤ grad_tol -> koniec
         d = (-H + λI)⁻¹ g                      (λ = 0 gdy -H > 0,
                                                 inaczej przesunięcie widma)
         ograniczenie kroku do max_step
         połowienie kroku aż ℓ nie maleje
    4. Na końcu hesjan pełnej wiarygodności w punkcie θ̂

GRANICE log_sigma:
    log_sigma jest przycinane do [log_sigma_min, log_sigma_max]. Na
    dolnej granicy z gradientem wskazującym na zewnątrz traktujemy
    pochodną po log_sigma jako zero (gradient rzutowany) - maksimum
    leży wtedy na brzegu przestrzeni parametrów (σ² -> 0), a fit jest
    zbieżny. Na GÓRNEJ granicy ten sam rzut pozwala dokończyć β, ale
    wynik ma converged = False: ℓ rośnie dalej z σ² -> ∞ (np. podzbiór,
    w którym każdy ekspert ocenia jednakowo), więc σ̂² = e^(2·log_sigma_max)
    nie jest estymatorem i nie może trafić do średniej σ̂²_w.

Brak zbieżności NIE jest wyjątkiem: FitResult.converged = False.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import logit

from ..core.errors import InvalidArgumentError, NumericOverflowError
from .likelihood import ModelParams, evaluate
from .quadrature import QuadratureRule, gauss_hermite
from .ratings import RatingsTable


# Maksymalna liczba połowień kroku w jednej iteracji
MAX_HALVINGS = 40


@dataclass(frozen=True)
class FitOptions:
    """
    Ustawienia optymalizatora.

    Attributes:
        quadrature_order (int): Rząd kwadratury Gaussa-Hermite'a
        adaptive (bool): Adaptacyjne centrowanie węzłów
        max_iter (int): Maks. liczba iteracji Newtona
        grad_tol (float): Tolerancja max|∇ℓ|
        beta_cap (float): |β| klastrów z separacją
        log_sigma_init (float): Start log σ
        initial_beta (Optional[Dict[int, float]]): Starty β (zamiast Haldane'a)
        log_sigma_bounds (Tuple[float, float]): Przedział log σ
        max_step (float): Maks. zmiana pojedynczej współrzędnej w kroku
    """
    quadrature_order: int = 50
    adaptive: bool = True
    max_iter: int = 200
    grad_tol: float = 1e-6
    beta_cap: float = 15.0
    log_sigma_init: float = 0.0
    initial_beta: Optional[Dict[int, float]] = None
    log_sigma_bounds: Tuple[float, float] = (-8.0, 4.0)
    max_step: float = 5.0

    def __post_init__(self):
        if self.quadrature_order < 1:
            raise InvalidArgumentError(f"quadrature_order must be ≥ 1, got {self.quadrature_order}")
        if self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be ≥ 1, got {self.max_iter}")
        if not self.grad_tol > 0:
            raise InvalidArgumentError(f"grad_tol must be > 0, got {self.grad_tol}")
        if not self.beta_cap > 0:
            raise InvalidArgumentError(f"beta_cap must be > 0, got {self.beta_cap}")
        if not self.max_step > 0:
            raise InvalidArgumentError(f"max_step must be > 0, got {self.max_step}")
        low, high = self.log_sigma_bounds
        if not low < high:
            raise InvalidArgumentError(f"log_sigma_bounds must be increasing, got {self.log_sigma_bounds}")
        if not low <= self.log_sigma_init <= high:
            raise InvalidArgumentError(
                f"log_sigma_init={self.log_sigma_init} outside bounds {self.log_sigma_bounds}"
            )

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "FitOptions":
        """Buduje opcje ze spłaszczonej sekcji `fit` konfiguracji."""
        return cls(
            quadrature_order=int(settings.get("quadrature_order", 50)),
            adaptive=bool(settings.get("adaptive", True)),
            max_iter=int(settings.get("max_iter", 200)),
            grad_tol=float(settings.get("grad_tol", 1e-6)),
            beta_cap=float(settings.get("beta_cap", 15.0)),
            log_sigma_init=float(settings.get("log_sigma_init", 0.0)),
            log_sigma_bounds=(
                float(settings.get("log_sigma_min", -8.0)),
                float(settings.get("log_sigma_max", 4.0)),
            ),
            max_step=float(settings.get("max_step", 5.0)),
        )

    def rule(self) -> QuadratureRule:
        return gauss_hermite(self.quadrature_order, adaptive=self.adaptive)


@dataclass(frozen=True, eq=False)
class FitResult:
    """
    Wynik dopasowania.

    Attributes:
        params (ModelParams): Estymatory β̂, log σ̂
        loglik (float): ℓ w punkcie params
        hessian (np.ndarray): ∇²ℓ w układzie (cluster_index..., log_sigma)
        converged (bool): Czy max|∇ℓ| ≤ grad_tol (bez klastrów z separacją)
        iterations (int): Liczba wykonanych iteracji
        separation_flags (FrozenSet[int]): Klastry z β przyciętym do ±β_cap
        cluster_index (np.ndarray): Kolejność β w hesjanie
        gradient (np.ndarray): ∇ℓ w punkcie params
    """
    params: ModelParams
    loglik: float
    hessian: np.ndarray
    converged: bool
    iterations: int
    separation_flags: FrozenSet[int] = frozenset()
    cluster_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    gradient: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def sigma2(self) -> float:
        return self.params.sigma2

    def beta_array(self) -> np.ndarray:
        """β̂ w kolejności cluster_index."""
        return self.params.beta_vector(self.cluster_index)

    def position(self, cluster_id: int) -> int:
        """Indeks wiersza klastra w hesjanie."""
        pos = int(np.searchsorted(self.cluster_index, cluster_id))
        if pos >= len(self.cluster_index) or self.cluster_index[pos] != cluster_id:
            raise KeyError(f"Cluster {cluster_id} not in fit")
        return pos

    def __repr__(self) -> str:
        return (
            f"FitResult(clusters={len(self.cluster_index)}, sigma2={self.sigma2:.4g}, "
            f"loglik={self.loglik:.6g}, converged={self.converged}, "
            f"iterations={self.iterations}, separated={len(self.separation_flags)})"
        )


def initial_beta(data: RatingsTable) -> np.ndarray:
    """Empiryczne logity z poprawką Haldane'a w kolejności cluster_index."""
    successes, totals = data.cluster_counts()
    return logit((successes + 0.5) / (totals + 1.0))


def fit_ml(data: RatingsTable, options: Optional[FitOptions] = None) -> FitResult:
    """
    Maksymalizuje ℓ(β, log_sigma) metodą Newtona-Raphsona.

    Args:
        data: Tabela ocen (niepusta)
        options: Ustawienia (None = domyślne)

    Returns:
        FitResult

    Raises:
        InvalidArgumentError: Pusta tabela

    Example:
        >>> table = RatingsTable.from_entries([(1, 1, 1), (1, 2, 0), (2, 1, 0), (2, 2, 1)])
        >>> result = fit_ml(table)
        >>> result.converged
        True
    """
    if options is None:
        options = FitOptions()
    if data.n_entries == 0:
        raise InvalidArgumentError("Cannot fit an empty ratings table")

    rule = options.rule()
    cluster_index = data.cluster_index
    n_clusters = data.n_clusters
    low, high = options.log_sigma_bounds

    # ─────────────────────────────────────────────────────────────────────
    # START I SEPARACJA
    # ─────────────────────────────────────────────────────────────────────
    beta = initial_beta(data)
    if options.initial_beta:
        for pos, cid in enumerate(cluster_index):
            if int(cid) in options.initial_beta:
                beta[pos] = float(options.initial_beta[int(cid)])

    separated = data.separated_clusters()
    free = np.ones(n_clusters + 1, dtype=bool)
    for pos, cid in enumerate(cluster_index):
        sign = separated.get(int(cid))
        if sign is not None:
            beta[pos] = sign * options.beta_cap
            free[pos] = False

    theta = np.append(beta, np.clip(options.log_sigma_init, low, high))

    # ─────────────────────────────────────────────────────────────────────
    # ITERACJE NEWTONA
    # ─────────────────────────────────────────────────────────────────────
    converged = False
    iterations = 0
    terms = evaluate(theta[:-1], theta[-1], data, rule, order=2)

    for iterations in range(1, options.max_iter + 1):
        grad = _projected(terms.gradient, theta[-1], low, high)
        if np.max(np.abs(grad[free])) <= options.grad_tol:
            converged = not _pinned_at_upper(terms.gradient, theta[-1], high)
            iterations -= 1
            break

        step = _newton_direction(terms.hessian[np.ix_(free, free)], grad[free])
        largest = np.max(np.abs(step))
        if largest > options.max_step:
            step *= options.max_step / largest

        accepted = False
        t = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = theta.copy()
            candidate[free] += t * step
            candidate[-1] = np.clip(candidate[-1], low, high)
            try:
                trial = evaluate(candidate[:-1], candidate[-1], data, rule, order=0)
            except NumericOverflowError:
                t *= 0.5
                continue
            if trial.loglik >= terms.loglik - 1e-12 * max(1.0, abs(terms.loglik)):
                accepted = True
                break
            t *= 0.5

        if not accepted:
            # ℓ nie rośnie w kierunku Newtona - dalsze kroki nic nie dadzą
            break

        theta = candidate
        terms = evaluate(theta[:-1], theta[-1], data, rule, order=2)
    else:
        grad = _projected(terms.gradient, theta[-1], low, high)
        converged = (
            bool(np.max(np.abs(grad[free])) <= options.grad_tol)
            and not _pinned_at_upper(terms.gradient, theta[-1], high)
        )

    params = ModelParams.from_vector(cluster_index, theta)
    return FitResult(
        params=params,
        loglik=terms.loglik,
        hessian=terms.hessian,
        converged=converged,
        iterations=iterations,
        separation_flags=frozenset(separated),
        cluster_index=cluster_index,
        gradient=terms.gradient,
    )


def _projected(gradient: np.ndarray, log_sigma: float, low: float, high: float) -> np.ndarray:
    """Zeruje pochodną po log_sigma, gdy wskazuje poza przedział."""
    grad = gradient.copy()
    if (log_sigma <= low and grad[-1] < 0) or (log_sigma >= high and grad[-1] > 0):
        grad[-1] = 0.0
    return grad


def _pinned_at_upper(gradient: np.ndarray, log_sigma: float, high: float) -> bool:
    """σ oparte o górną granicę z ℓ wciąż rosnącym - brzeg, nie maksimum."""
    return bool(log_sigma >= high and gradient[-1] > 0)


def _newton_direction(hessian: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """
    Rozwiązuje (-H + λI) d = g.

    λ = 0 gdy -H jest dodatnio określony; w przeciwnym razie widmo jest
    przesuwane tak, by najmniejsza wartość własna była dodatnia.
    """
    neg = -hessian
    try:
        factor = linalg.cho_factor(neg, lower=True, check_finite=False)
        return linalg.cho_solve(factor, gradient, check_finite=False)
    except linalg.LinAlgError:
        pass

    eigvals = linalg.eigvalsh(neg, check_finite=False)
    scale = max(1.0, float(np.max(np.abs(np.diag(neg)))))
    shift = -float(eigvals[0]) + 1e-4 * scale
    shifted = neg + shift * np.eye(len(neg))
    factor = linalg.cho_factor(shifted, lower=True, check_finite=False)
    return linalg.cho_solve(factor, gradient, check_finite=False)

"""
Brzegowe prawdopodobieństwo sukcesu klastra.

    P_j = ∫ logistic(β_j + b) φ(b | 0, σ²) db

Całkowanie stochastyczne (Q losowań b_q ~ N(0, σ²)):

    P̂_j = (1/Q) Σ_q logistic(β_j + b_q)

Pochodne potrzebne metodzie delta liczone z TYCH SAMYCH losowań:

    ∂P/∂β  = E[ s(1-s) ]                     s = logistic(β + b)
    ∂P/∂σ² = E[ s · (b² - σ²) / (2σ⁴) ]

Wersja deterministyczna (kwadratura Gaussa-Hermite'a rzędu 50) służy
jako wyrocznia w testach i w selfcheck.
"""

from __future__ import annotations
from typing import Tuple, Union

import numpy as np
from scipy.special import expit

from ..core.errors import InvalidArgumentError
from ..core.rng import StreamRNG
from ..model.quadrature import gauss_hermite

ArrayLike = Union[float, np.ndarray]


def _check(sigma2: float, q: int = 1) -> None:
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise InvalidArgumentError(f"sigma2 must be a finite value ≥ 0, got {sigma2}")
    if q < 1:
        raise InvalidArgumentError(f"Number of draws must be ≥ 1, got {q}")


def success_probability(beta: float, sigma2: float, q: int, rng: StreamRNG) -> float:
    """
    P̂ = średnia logistic(β + b_q) po Q losowaniach b_q ~ N(0, σ²).

    Dla σ² = 0 zwraca dokładnie logistic(β) (bez losowania).

    Raises:
        InvalidArgumentError: σ² < 0 albo Q < 1

    Example:
        >>> round(success_probability(3.07, 10.279, 10_000, StreamRNG(1)), 2)
        0.8
    """
    _check(sigma2, q)
    if sigma2 == 0:
        return float(expit(beta))
    return float(success_probability_from_draws(beta, sigma2, rng.standard_normal(q)))


def success_probability_from_draws(beta: ArrayLike, sigma2: float, z: np.ndarray) -> ArrayLike:
    """
    P̂ ze wspólnych standardowych losowań z (b_q = σ·z_q).

    `beta` może być wektorem - wtedy zwraca wektor P̂ (wspólne liczby
    losowe dla wszystkich β).
    """
    _check(sigma2, len(z))
    beta_arr = np.asarray(beta, dtype=float)
    b = np.sqrt(sigma2) * np.asarray(z, dtype=float)
    values = expit(beta_arr[..., None] + b).mean(axis=-1)
    return float(values) if values.ndim == 0 else values


def mc_standard_error(beta: float, sigma2: float, z: np.ndarray) -> float:
    """Błąd standardowy średniej Monte Carlo."""
    s = expit(beta + np.sqrt(sigma2) * np.asarray(z, dtype=float))
    return float(np.std(s, ddof=1) / np.sqrt(len(s))) if len(s) > 1 else 0.0


def success_probability_quadrature(beta: ArrayLike, sigma2: float, order: int = 50) -> ArrayLike:
    """
    P_j kwadraturą Gaussa-Hermite'a (deterministycznie).

    Example:
        >>> round(success_probability_quadrature(2.51, 10.279), 2)
        0.76
    """
    _check(sigma2)
    rule = gauss_hermite(order)
    beta_arr = np.asarray(beta, dtype=float)
    b = np.sqrt(2.0 * sigma2) * rule.nodes
    values = expit(beta_arr[..., None] + b) @ (rule.weights / np.sqrt(np.pi))
    return float(values) if np.ndim(values) == 0 else values


def probability_derivatives(beta: float, sigma2: float, z: np.ndarray) -> Tuple[float, float, float]:
    """
    (P̂, ∂P/∂β, ∂P/∂σ²) ze wspólnych losowań z ~ N(0, 1).

    Przy σ² = 0 pochodna po σ² jest granicą ½·s(1-s)(1-2s).
    """
    _check(sigma2, len(z))
    if sigma2 == 0:
        s = float(expit(beta))
        return s, s * (1.0 - s), 0.5 * s * (1.0 - s) * (1.0 - 2.0 * s)
    b = np.sqrt(sigma2) * np.asarray(z, dtype=float)
    s = expit(beta + b)
    p = float(np.mean(s))
    d_beta = float(np.mean(s * (1.0 - s)))
    d_sigma2 = float(np.mean(s * (b * b - sigma2)) / (2.0 * sigma2 * sigma2))
    return p, d_beta, d_sigma2


def probability_derivatives_quadrature(beta: float, sigma2: float, order: int = 50) -> Tuple[float, float, float]:
    """Jak probability_derivatives(), ale kwadraturą Gaussa-Hermite'a."""
    _check(sigma2)
    if sigma2 == 0:
        return probability_derivatives(beta, 0.0, np.zeros(1))
    rule = gauss_hermite(order)
    w = rule.weights / np.sqrt(np.pi)
    b = np.sqrt(2.0 * sigma2) * rule.nodes
    s = expit(beta + b)
    return (
        float(w @ s),
        float(w @ (s * (1.0 - s))),
        float(w @ (s * (b * b - sigma2))) / (2.0 * sigma2 * sigma2),
    )

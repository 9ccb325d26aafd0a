"""
Kwadratura Gaussa-Hermite'a.

Reguła rzędu n przybliża całki z wagą exp(-x²):

    ∫ f(x) exp(-x²) dx  ≈  Σ_q w_q f(x_q)

i jest dokładna dla wielomianów stopnia ≤ 2n-1.

Całkowanie po efekcie losowym b ~ N(0, σ²) robimy przez podstawienie
b = σ√2·x, wtedy

    ∫ g(b) φ(b | 0, σ²) db  ≈  Σ_q (w_q / √π) g(σ√2·x_q)

NORMALIZACJA:
    Σ_q w_q = √π   (standardowa normalizacja Hermite'a)

Węzły i wagi liczy numpy.polynomial.hermite.hermgauss; tutaj tylko
wymuszamy dokładną symetrię względem zera i cache'ujemy wynik.
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..core.errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Węzły i wagi reguły Gaussa-Hermite'a.

    Attributes:
        nodes (np.ndarray): Węzły rosnąco, symetryczne względem 0
        weights (np.ndarray): Dodatnie wagi, suma = √π
        order (int): Rząd reguły (liczba węzłów)
        adaptive (bool): Czy centrować węzły na modzie warunkowym eksperta
    """
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    adaptive: bool = False

    @property
    def log_weights(self) -> np.ndarray:
        """log(w_q / √π) - wagi dla całki względem N(0, 1/2) -> N(0, σ²)."""
        return np.log(self.weights) - 0.5 * np.log(np.pi)

    def with_adaptive(self, adaptive: bool) -> "QuadratureRule":
        """Ta sama reguła z innym trybem centrowania."""
        return QuadratureRule(self.nodes, self.weights, self.order, adaptive)

    def integrate(self, f) -> float:
        """Przybliża ∫ f(x) exp(-x²) dx."""
        return float(np.dot(self.weights, f(self.nodes)))

    def __repr__(self) -> str:
        return f"QuadratureRule(order={self.order}, adaptive={self.adaptive})"


@lru_cache(maxsize=64)
def _hermgauss_symmetric(order: int):
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    # symetria dokładna co do bitu
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite(order: int, adaptive: bool = False) -> QuadratureRule:
    """
    Reguła Gaussa-Hermite'a rzędu `order`.

    Args:
        order: Liczba węzłów (≥ 1)
        adaptive: Tryb adaptacyjny (centrowanie na modzie)

    Returns:
        QuadratureRule

    Raises:
        InvalidArgumentError: order ≤ 0

    Example:
        >>> rule = gauss_hermite(2)
        >>> rule.nodes          # ±1/√2
        array([-0.70710678,  0.70710678])
    """
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise InvalidArgumentError(f"Quadrature order must be a positive integer, got {order}")
    nodes, weights = _hermgauss_symmetric(int(order))
    return QuadratureRule(nodes=nodes, weights=weights, order=int(order), adaptive=adaptive)

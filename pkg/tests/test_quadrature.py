"""
Testy kwadratury Gaussa-Hermite'a.

Testuje:
- Normalizację wag i symetrię węzłów
- Dokładność dla wielomianów
- Całkę względem N(0, σ²)
- Walidację rzędu
"""

import math

import numpy as np
import pytest

from src.core.errors import InvalidArgumentError
from src.model.quadrature import gauss_hermite


# ═══════════════════════════════════════════════════════════════════════════
# TEST: WĘZŁY I WAGI
# ═══════════════════════════════════════════════════════════════════════════

@pytest.mark.parametrize("order", [1, 2, 5, 30, 50])
def test_weights_sum_to_sqrt_pi(order):
    rule = gauss_hermite(order)
    assert rule.weights.sum() == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert np.all(rule.weights > 0)


def test_nodes_symmetric_exactly():
    rule = gauss_hermite(31)
    assert np.array_equal(rule.nodes, -rule.nodes[::-1])
    assert rule.nodes[15] == 0.0


def test_order_two_nodes():
    """Rząd 2: węzły ±1/√2."""
    rule = gauss_hermite(2)
    assert rule.nodes == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_rule_arrays_read_only():
    rule = gauss_hermite(10)
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


# ═══════════════════════════════════════════════════════════════════════════
# TEST: DOKŁADNOŚĆ
# ═══════════════════════════════════════════════════════════════════════════

def test_exact_for_polynomials():
    """∫ x⁴ e^{-x²} dx = 3√π/4, rząd 3 wystarcza (stopień ≤ 5)."""
    rule = gauss_hermite(3)
    assert rule.integrate(lambda x: x ** 4) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-12)


def test_normal_variance_by_substitution():
    """E[b²] dla b ~ N(0, σ²) przez b = σ√2·x."""
    rule = gauss_hermite(10)
    sigma2 = 12.25
    b = math.sqrt(2 * sigma2) * rule.nodes
    assert np.dot(rule.weights / math.sqrt(math.pi), b ** 2) == pytest.approx(sigma2, rel=1e-12)


def test_log_weights_normalised():
    rule = gauss_hermite(20)
    assert np.exp(rule.log_weights).sum() == pytest.approx(1.0, rel=1e-12)


def test_with_adaptive_keeps_nodes():
    rule = gauss_hermite(8)
    adaptive = rule.with_adaptive(True)
    assert adaptive.adaptive
    assert np.array_equal(adaptive.nodes, rule.nodes)


# ═══════════════════════════════════════════════════════════════════════════
# TEST: WALIDACJA
# ═══════════════════════════════════════════════════════════════════════════

@pytest.mark.parametrize("order", [0, -3, 2.5])
def test_invalid_order_raises(order):
    with pytest.raises(InvalidArgumentError):
        gauss_hermite(order)

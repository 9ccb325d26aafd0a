"""
Testy brzegowej log-wiarygodności.

Testuje:
- Wartość ℓ vs bezpośrednie całkowanie (scipy.integrate.quad)
- Granicę σ² -> 0 (niezależne próby Bernoulliego)
- Gradient vs różnice skończone (100 losowych konfiguracji)
- Hesjan analityczny vs numeryczny (także tryb adaptacyjny)
- Wagi ω_i jako wykładniki
- Błędy: brak β, log_sigma poza zakresem
- Zbieżność kwadratury na danych o kształcie badania (σ² = 4, 12.25, 16)
"""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import expit

from src.cli.selfcheck import random_params, random_table
from src.core.errors import InvalidArgumentError, ModelMismatchError
from src.core.rng import StreamRNG
from src.model.likelihood import (
    ModelParams,
    bernoulli_log_likelihood,
    conditional_modes,
    log_likelihood,
    log_likelihood_gradient,
    log_likelihood_hessian,
    numeric_hessian,
)
from src.model.fitting import FitOptions, fit_ml
from src.model.quadrature import gauss_hermite
from src.model.ratings import RatingsTable
from src.simstudy.config import SimConfig
from src.simstudy.generator import draw_true_betas, generate_dataset


# ═══════════════════════════════════════════════════════════════════════════
# FIXTURES
# ═══════════════════════════════════════════════════════════════════════════

@pytest.fixture
def small_table():
    """3 ekspertów, 2 klastry."""
    return RatingsTable.from_entries([
        (1, 1, 1), (1, 2, 0),
        (2, 1, 1), (2, 2, 1),
        (3, 1, 0),
    ])


def direct_loglik(table, beta, sigma2):
    """ℓ przez adaptacyjne całkowanie quad dla każdego eksperta."""
    total = 0.0
    for e in table.expert_index:
        rows = [(c, r) for ex, c, r in table.entries if ex == e]

        def integrand(b):
            p = 1.0
            for c, r in rows:
                s = expit(beta[c] + b)
                p *= s if r else 1.0 - s
            return p * math.exp(-b * b / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)

        value, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-13)
        total += math.log(value)
    return total


def central_gradient(params, table, rule, step=1e-6):
    theta = params.to_vector(table.cluster_index)
    grad = np.zeros_like(theta)
    for k in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[k] += step
        down[k] -= step
        grad[k] = (
            log_likelihood(ModelParams.from_vector(table.cluster_index, up), table, rule)
            - log_likelihood(ModelParams.from_vector(table.cluster_index, down), table, rule)
        ) / (2 * step)
    return grad


# ═══════════════════════════════════════════════════════════════════════════
# TEST: WARTOŚĆ
# ═══════════════════════════════════════════════════════════════════════════

def test_loglik_matches_direct_integration(small_table):
    beta = {1: 0.4, 2: -0.7}
    params = ModelParams(beta=beta, log_sigma=0.5 * math.log(2.0))
    value = log_likelihood(params, small_table, gauss_hermite(40))
    assert value == pytest.approx(direct_loglik(small_table, beta, 2.0), abs=1e-8)


def test_adaptive_matches_direct_integration(small_table):
    beta = {1: 1.3, 2: -0.2}
    params = ModelParams(beta=beta, log_sigma=math.log(3.5))
    # jedna ocena na eksperta i σ = 3.5: biegun logistyki blisko węzłów, stąd rząd 60
    value = log_likelihood(params, small_table, gauss_hermite(60, adaptive=True))
    assert value == pytest.approx(direct_loglik(small_table, beta, 3.5 ** 2), abs=1e-6)


def test_small_sigma_tends_to_bernoulli(small_table):
    params = ModelParams(beta={1: 0.3, 2: -1.1}, log_sigma=-8.0)
    assert log_likelihood(params, small_table, gauss_hermite(20)) == pytest.approx(
        bernoulli_log_likelihood(params, small_table), abs=1e-5
    )


def test_empty_table_loglik_zero():
    table = RatingsTable.from_entries([])
    assert log_likelihood(ModelParams(beta={}, log_sigma=0.0), table, gauss_hermite(5)) == 0.0


def test_entry_order_invariance():
    rng = StreamRNG(9)
    table = random_table(rng, 6, 4)
    params = random_params(rng, table)
    shuffled = RatingsTable.from_entries(rng.permutation(table.entries))
    rule = gauss_hermite(25)
    assert log_likelihood(params, shuffled, rule) == log_likelihood(params, table, rule)


@pytest.mark.parametrize("m", [2, 3])
def test_weights_act_as_exponents(m):
    """Waga m dla eksperta = ekspert powielony m razy, z dokładnością 1e-12 (względnie)."""
    entries = [(1, 1, 1), (1, 2, 0), (2, 1, 0), (2, 2, 0)]
    weighted = RatingsTable.from_entries(entries, weights={1: float(m), 2: 1.0})
    copies = [(10 + k, c, r) for k in range(m - 1) for e, c, r in entries if e == 1]
    duplicated = RatingsTable.from_entries(entries + copies)
    params = ModelParams(beta={1: 0.5, 2: -0.5}, log_sigma=0.2)
    rule = gauss_hermite(30)
    # m·x i x + ... + x różnią się o kilka ulp, więc nie bitowo
    assert log_likelihood(params, weighted, rule) == pytest.approx(
        log_likelihood(params, duplicated, rule), rel=1e-12, abs=0.0
    )


def test_unit_weights_bit_identical():
    rng = StreamRNG(12)
    table = random_table(rng, 6, 4)
    params = random_params(rng, table)
    unit = table.with_weights({int(e): 1.0 for e in table.expert_index})
    for rule in (gauss_hermite(30), gauss_hermite(30, adaptive=True)):
        assert log_likelihood(params, unit, rule) == log_likelihood(params, table, rule)
        assert np.array_equal(
            log_likelihood_hessian(params, unit, rule), log_likelihood_hessian(params, table, rule)
        )


# ═══════════════════════════════════════════════════════════════════════════
# TEST: POCHODNE
# ═══════════════════════════════════════════════════════════════════════════

def test_gradient_matches_finite_differences():
    """100 losowych konfiguracji, tolerancja względna 1e-4."""
    rule = gauss_hermite(20)
    for c in range(100):
        rng = StreamRNG(2024, c)
        table = random_table(rng, int(rng.generator.integers(1, 8)), int(rng.generator.integers(1, 6)))
        params = random_params(rng, table)
        analytic = log_likelihood_gradient(params, table, rule)
        numeric = central_gradient(params, table, rule)
        assert analytic == pytest.approx(numeric, rel=1e-4, abs=1e-6), f"configuration {c}"


def test_weighted_gradient_matches_finite_differences():
    rng = StreamRNG(77)
    table = random_table(rng, 6, 4)
    table = table.with_weights({int(e): 0.5 + i for i, e in enumerate(table.expert_index)})
    params = random_params(rng, table)
    rule = gauss_hermite(20)
    assert log_likelihood_gradient(params, table, rule) == pytest.approx(
        central_gradient(params, table, rule), rel=1e-4, abs=1e-6
    )


@pytest.mark.parametrize("adaptive", [False, True])
def test_hessian_matches_numeric(adaptive):
    rng = StreamRNG(31, int(adaptive))
    table = random_table(rng, 7, 4)
    params = random_params(rng, table)
    rule = gauss_hermite(40, adaptive=adaptive)
    analytic = log_likelihood_hessian(params, table, rule)
    assert np.allclose(analytic, analytic.T)
    assert analytic == pytest.approx(numeric_hessian(params, table, rule), rel=1e-4, abs=1e-5)


def test_conditional_modes_zero_gradient():
    rng = StreamRNG(5)
    table = random_table(rng, 5, 3)
    params = random_params(rng, table)
    beta = params.beta_vector(table.cluster_index)
    mode, scale = conditional_modes(beta, params.log_sigma, table)
    s = expit(beta[table.cluster_pos] + mode[table.expert_pos])
    h1 = np.add.reduceat(table.ratings - s, table.expert_starts) - mode / params.sigma2
    assert np.max(np.abs(h1)) < 1e-8
    assert np.all(scale > 0)


# ═══════════════════════════════════════════════════════════════════════════
# TEST: BŁĘDY
# ═══════════════════════════════════════════════════════════════════════════

def test_missing_beta_raises(small_table):
    params = ModelParams(beta={1: 0.0}, log_sigma=0.0)
    with pytest.raises(ModelMismatchError):
        log_likelihood(params, small_table, gauss_hermite(10))


@pytest.mark.parametrize("log_sigma", [float("inf"), float("nan"), 1e6, -1e6])
def test_log_sigma_out_of_range_raises(log_sigma):
    with pytest.raises(InvalidArgumentError):
        ModelParams(beta={1: 0.0}, log_sigma=log_sigma)


def test_params_vector_roundtrip(small_table):
    params = ModelParams(beta={1: 0.25, 2: -3.0}, log_sigma=0.7)
    vector = params.to_vector(small_table.cluster_index)
    assert list(vector) == [0.25, -3.0, 0.7]
    assert ModelParams.from_vector(small_table.cluster_index, vector) == params


# ═══════════════════════════════════════════════════════════════════════════
# TEST: ZBIEŻNOŚĆ KWADRATURY (dane jak w badaniu symulacyjnym)
# ═══════════════════════════════════════════════════════════════════════════

@pytest.fixture(scope="module", params=[4.0, 12.25, 16.0])
def study_fit(request):
    """147 ekspertów, 50 klastrów, ~25 ocen; dopasowanie domyślnymi opcjami."""
    config = SimConfig(sigma2_true=request.param, master_seed=404)
    data = generate_dataset(config, draw_true_betas(config), 0)
    return data, fit_ml(data)


def test_default_order_converged_at_optimum(study_fit):
    data, fit = study_fit
    order = FitOptions().quadrature_order
    default = log_likelihood(fit.params, data, gauss_hermite(order, adaptive=True))
    finer = log_likelihood(fit.params, data, gauss_hermite(order + 20, adaptive=True))
    assert default == pytest.approx(fit.loglik, abs=1e-9)
    assert abs(default - finer) < 1e-6


def test_order_30_agrees_with_order_50(study_fit):
    data, fit = study_fit
    values = {q: log_likelihood(fit.params, data, gauss_hermite(q, adaptive=True)) for q in (10, 30, 50)}
    assert abs(values[30] - values[50]) <= 1e-6 * abs(values[50])
    assert abs(values[30] - values[50]) <= abs(values[10] - values[50])


def test_default_fit_has_no_spurious_maximum(study_fit):
    data, fit = study_fit
    assert fit.converged
    finer = fit_ml(data, FitOptions(quadrature_order=80, initial_beta=fit.params.beta,
                                    log_sigma_init=fit.params.log_sigma))
    assert finer.converged
    assert finer.params.to_vector(data.cluster_index) == pytest.approx(
        fit.params.to_vector(data.cluster_index), abs=1e-4
    )

"""
Testy dopasowania ML (Newton-Raphson).

Testuje:
- Zgodność z wyrocznią: całkowanie na gęstej siatce + przeszukiwanie siatki
  (scipy.optimize.brute) na ≥ 50 małych zbiorach
- Zbieżność i gradient w optimum
- Separację (same 0 / same 1)
- Brzegi σ² -> 0 (zbieżny) i górna granica log σ (niezbieżny)
- Determinizm i niezależność od kolejności wpisów
- Walidację FitOptions
"""

import numpy as np
import pytest
from scipy import optimize
from scipy.special import expit

from src.core.errors import InvalidArgumentError
from src.core.rng import StreamRNG
from src.model.fitting import FitOptions, fit_ml, initial_beta
from src.model.ratings import RatingsTable


# ═══════════════════════════════════════════════════════════════════════════
# WYROCZNIA
# ═══════════════════════════════════════════════════════════════════════════

# ∫ f(σz) φ(z) dz trapezami na gęstej siatce z
_Z = np.linspace(-10.0, 10.0, 2001)
_PHI = np.exp(-0.5 * _Z ** 2) / np.sqrt(2 * np.pi) * (_Z[1] - _Z[0])


def oracle_negloglik(theta, table):
    beta, log_sigma = np.asarray(theta[:-1]), theta[-1]
    b = np.exp(log_sigma) * _Z
    total = 0.0
    for e in table.expert_index:
        mask = table.experts == e
        eta = beta[np.searchsorted(table.cluster_index, table.clusters[mask])][:, None] + b[None, :]
        y = table.ratings[mask][:, None]
        log_p = np.sum(y * eta - np.logaddexp(0.0, eta), axis=0)
        total += np.log(np.dot(np.exp(log_p), _PHI))
    return -total


def _polish(func, x0, args=()):
    return optimize.minimize(func, x0, args=args, method="Nelder-Mead",
                             options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 20000, "maxfev": 40000})


def oracle_fit(table):
    ranges = [(-4.0, 4.0)] * table.n_clusters + [(-2.0, 2.0)]
    return optimize.brute(oracle_negloglik, ranges, args=(table,), Ns=5, finish=_polish)


def tiny_dataset(rng):
    """≤ 4 ekspertów, ≤ 3 klastry, ekspert z wyraźnym efektem losowym."""
    n_experts = int(rng.generator.integers(2, 5))
    n_clusters = int(rng.generator.integers(2, 4))
    beta = rng.normal(0.0, 1.0, n_clusters)
    entries = []
    for e in range(n_experts):
        b = float(rng.normal(0.0, 4.0, 1)[0])
        for c in range(n_clusters):
            if rng.generator.random() < 0.85:
                entries.append((e, c, int(rng.generator.random() < expit(beta[c] + b))))
    return RatingsTable.from_entries(entries)


# ═══════════════════════════════════════════════════════════════════════════
# TEST: WYROCZNIA
# ═══════════════════════════════════════════════════════════════════════════

def test_fit_matches_grid_search_oracle():
    options = FitOptions(quadrature_order=40, adaptive=False, grad_tol=1e-8)
    compared = 0
    for t in range(600):
        table = tiny_dataset(StreamRNG(2718, t))
        if table.n_entries == 0 or table.separated_clusters():
            continue
        oracle = oracle_fit(table)
        # tylko optimum wewnątrz przestrzeni (σ̂² > 0 i niezbyt duże)
        if not -1.5 < oracle[-1] < 1.2:
            continue
        fit = fit_ml(table, options)
        assert fit.converged, f"dataset {t}"
        theta = fit.params.to_vector(table.cluster_index)
        assert theta == pytest.approx(oracle, abs=1e-3), f"dataset {t}"
        assert -fit.loglik == pytest.approx(oracle_negloglik(oracle, table), abs=1e-6)
        compared += 1
        if compared == 50:
            break
    assert compared == 50


# ═══════════════════════════════════════════════════════════════════════════
# TEST: ZBIEŻNOŚĆ
# ═══════════════════════════════════════════════════════════════════════════

@pytest.fixture
def overdispersed():
    """Eksperci surowi (same 0) i łagodni (same 1) na wspólnych klastrach."""
    rng = StreamRNG(11)
    entries = []
    for e in range(40):
        b = float(rng.normal(0.0, 6.0, 1)[0])
        for c in range(5):
            entries.append((e, c, int(rng.generator.random() < expit(c - 2.0 + b))))
    return RatingsTable.from_entries(entries)


def test_fit_converges_with_small_gradient(overdispersed):
    fit = fit_ml(overdispersed)
    assert fit.converged
    free = [fit.position(c) for c in overdispersed.cluster_index if int(c) not in fit.separation_flags]
    assert np.max(np.abs(fit.gradient[free + [-1]])) <= 1e-6
    assert fit.sigma2 > 1.0


def test_hessian_negative_definite_at_optimum(overdispersed):
    fit = fit_ml(overdispersed)
    assert np.all(np.linalg.eigvalsh(-fit.hessian) > 0)


def test_fit_deterministic(overdispersed):
    a, b = fit_ml(overdispersed), fit_ml(overdispersed)
    assert a.params == b.params
    assert a.loglik == b.loglik
    assert np.array_equal(a.hessian, b.hessian)


def test_fit_entry_order_invariant(overdispersed):
    shuffled = RatingsTable.from_entries(StreamRNG(4).permutation(overdispersed.entries))
    assert fit_ml(shuffled).params == fit_ml(overdispersed).params


def test_adaptive_agrees_with_plain(overdispersed):
    """Zwykła reguła przy σ ≈ 6 potrzebuje bardzo wielu węzłów."""
    plain = fit_ml(overdispersed, FitOptions(quadrature_order=160, adaptive=False))
    adaptive = fit_ml(overdispersed, FitOptions(quadrature_order=30, adaptive=True))
    assert adaptive.converged
    assert adaptive.params.to_vector(overdispersed.cluster_index) == pytest.approx(
        plain.params.to_vector(overdispersed.cluster_index), abs=1e-3
    )


def test_initial_beta_haldane():
    table = RatingsTable.from_entries([(1, 1, 1), (2, 1, 1), (3, 1, 0)])
    assert initial_beta(table)[0] == pytest.approx(np.log(2.5 / 1.5))


# ═══════════════════════════════════════════════════════════════════════════
# TEST: PRZYPADKI BRZEGOWE
# ═══════════════════════════════════════════════════════════════════════════

def test_separated_cluster_clamped():
    entries = [(e, 1, 1) for e in range(6)]
    entries += [(e, 2, e % 2) for e in range(6)]
    fit = fit_ml(RatingsTable.from_entries(entries), FitOptions(beta_cap=15.0))
    assert fit.separation_flags == frozenset({1})
    assert fit.params.beta[1] == 15.0
    assert fit.converged


def test_all_zero_cluster_clamped_negative():
    entries = [(e, 1, 0) for e in range(4)] + [(e, 2, e % 2) for e in range(4)]
    fit = fit_ml(RatingsTable.from_entries(entries), FitOptions(beta_cap=10.0))
    assert fit.params.beta[1] == -10.0


def test_no_overdispersion_sigma_to_lower_bound():
    """Każdy ekspert ma jedną 1 i jedno 0 - σ̂² -> 0."""
    entries = []
    for e in range(8):
        entries += [(e, 1, e % 2), (e, 2, 1 - e % 2)]
    fit = fit_ml(RatingsTable.from_entries(entries))
    assert fit.converged
    assert fit.sigma2 < 0.01
    assert fit.params.beta[1] == pytest.approx(0.0, abs=1e-4)


def test_unanimous_experts_sigma_at_upper_bound_not_converged():
    """Każdy ekspert ocenia wszystko jednakowo - ℓ rośnie bez końca z σ²."""
    entries = [(e, c, e % 2) for e in range(10) for c in range(3)]
    table = RatingsTable.from_entries(entries)
    assert not table.separated_clusters()
    fit = fit_ml(table)
    assert fit.params.log_sigma == 4.0
    assert fit.gradient[-1] > 0
    assert not fit.converged


def test_single_entry_table():
    fit = fit_ml(RatingsTable.from_entries([(1, 1, 1)]))
    assert fit.separation_flags == frozenset({1})


def test_empty_table_raises():
    with pytest.raises(InvalidArgumentError):
        fit_ml(RatingsTable.from_entries([]))


def test_position_unknown_cluster(overdispersed):
    with pytest.raises(KeyError):
        fit_ml(overdispersed).position(999)


# ═══════════════════════════════════════════════════════════════════════════
# TEST: FitOptions
# ═══════════════════════════════════════════════════════════════════════════

@pytest.mark.parametrize("kwargs", [
    {"quadrature_order": 0},
    {"max_iter": 0},
    {"grad_tol": 0.0},
    {"beta_cap": -1.0},
    {"max_step": 0.0},
    {"log_sigma_bounds": (1.0, -1.0)},
    {"log_sigma_init": 9.0},
])
def test_fit_options_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        FitOptions(**kwargs)


def test_fit_options_from_settings():
    options = FitOptions.from_settings({"quadrature_order": 12, "log_sigma_min": -5, "log_sigma_max": 3})
    assert options.quadrature_order == 12
    assert options.log_sigma_bounds == (-5.0, 3.0)
    assert options.rule().order == 12

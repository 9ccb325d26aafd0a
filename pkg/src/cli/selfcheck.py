"""
Podkomenda selfcheck - szybki zestaw wyroczni numerycznych.

Każdy test dostaje CheckContext i zwraca CheckOutcome. Rejestr
CHECK_REGISTRY ustala kolejność i nazwy wypisywane na stdout:

    gradient            analityczny gradient vs różnice centralne
    hessian             analityczny hesjan vs numeric_hessian
    quadrature          zbieżność ℓ z rzędem kwadratury (dane jak w badaniu)
    mc_vs_quadrature    P̂ z losowań MC vs P z kwadratury
    S=1 equals full ML  procedura z jednym podzbiorem = fit_ml
    partition           rozłączność i pokrycie podziałów

Gradient jest wstrzykiwany (CheckContext.gradient_fn), żeby test
negatywny mógł podstawić celowo błędną implementację.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..core.rng import StreamRNG
from ..events.event_logger import EventLogger, EventType
from ..model.fitting import FitOptions, fit_ml
from ..model.likelihood import (
    ModelParams,
    log_likelihood,
    log_likelihood_gradient,
    log_likelihood_hessian,
    numeric_hessian,
)
from ..model.quadrature import QuadratureRule, gauss_hermite
from ..model.ratings import RatingsTable
from ..simstudy.config import SimConfig
from ..simstudy.generator import draw_true_betas, generate_dataset
from ..splitproc.partition import Partition, PartitionSpec, make_partition
from ..splitproc.probability import (
    mc_standard_error,
    success_probability_from_draws,
    success_probability_quadrature,
)
from ..splitproc.procedure import run_procedure

GradientFn = Callable[[ModelParams, RatingsTable, QuadratureRule], np.ndarray]

# Klucz strumieni selfchecka (stały - wynik nie zależy od ustawień użytkownika)
SELFCHECK_SEED = 20140601


@dataclass
class CheckContext:
    """
    Wejście testów.

    Attributes:
        gradient_fn (GradientFn): Gradient sprawdzany przez test "gradient"
        configurations (int): Liczba losowych konfiguracji w teście gradientu
        seed (int): Ziarno danych testowych
    """
    gradient_fn: GradientFn = log_likelihood_gradient
    configurations: int = 25
    seed: int = SELFCHECK_SEED


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ""
    data: Dict[str, float] = field(default_factory=dict)


def random_table(rng: StreamRNG, n_experts: int, n_clusters: int, density: float = 0.7) -> RatingsTable:
    """Mała losowa tabela: każdy ekspert ocenia co najmniej jeden klaster."""
    entries = []
    for e in range(n_experts):
        rated = [c for c in range(n_clusters) if rng.generator.random() < density]
        if not rated:
            rated = [int(rng.generator.integers(n_clusters))]
        entries.extend((e, c, int(rng.generator.random() < 0.5)) for c in rated)
    return RatingsTable.from_entries(entries)


def random_params(rng: StreamRNG, table: RatingsTable) -> ModelParams:
    return ModelParams(
        beta={int(c): float(v) for c, v in zip(table.cluster_index, rng.normal(0.0, 2.0, table.n_clusters))},
        log_sigma=float(rng.generator.uniform(-1.0, 1.2)),
    )


def _central_gradient(params: ModelParams, data: RatingsTable, rule: QuadratureRule, step: float = 1e-6) -> np.ndarray:
    theta = params.to_vector(data.cluster_index)
    grad = np.zeros_like(theta)
    for k in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[k] += step
        down[k] -= step
        grad[k] = (
            log_likelihood(ModelParams.from_vector(data.cluster_index, up), data, rule)
            - log_likelihood(ModelParams.from_vector(data.cluster_index, down), data, rule)
        ) / (2.0 * step)
    return grad


# ═══════════════════════════════════════════════════════════════════════════
# TESTY
# ═══════════════════════════════════════════════════════════════════════════

def check_gradient(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for c in range(ctx.configurations):
        rng = StreamRNG(ctx.seed, 0, c)
        data = random_table(rng, n_experts=int(rng.generator.integers(2, 7)),
                            n_clusters=int(rng.generator.integers(2, 5)))
        params = random_params(rng, data)
        rule = gauss_hermite(20)
        analytic = np.asarray(ctx.gradient_fn(params, data, rule), dtype=float)
        numeric = _central_gradient(params, data, rule)
        error = np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric)))
        worst = max(worst, float(error))
    return CheckOutcome("gradient", worst <= 1e-4, f"max relative error {worst:.2e}", {"max_error": worst})


def check_hessian(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for c in range(5):
        rng = StreamRNG(ctx.seed, 1, c)
        data = random_table(rng, n_experts=5, n_clusters=3)
        params = random_params(rng, data)
        rule = gauss_hermite(20)
        analytic = log_likelihood_hessian(params, data, rule)
        numeric = numeric_hessian(params, data, rule)
        error = np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric)))
        worst = max(worst, float(error))
    return CheckOutcome("hessian", worst <= 1e-4, f"max relative error {worst:.2e}", {"max_error": worst})


def check_quadrature(ctx: CheckContext) -> CheckOutcome:
    """
    ℓ przy rzędach 30 / domyślnym / domyślnym + 20 na danych o kształcie
    badania symulacyjnego (147 ekspertów, ~25 ocen, σ² = 16).
    """
    config = SimConfig(sigma2_true=16.0, master_seed=ctx.seed)
    betas = draw_true_betas(config)
    data = generate_dataset(config, betas, 0)
    params = ModelParams(beta=betas, log_sigma=0.5 * float(np.log(config.sigma2_true)))
    order = FitOptions().quadrature_order
    low, default, high = (
        log_likelihood(params, data, gauss_hermite(q, adaptive=True)) for q in (30, order, order + 20)
    )
    converged = abs(default - high)
    coarse = abs(low - default) / abs(default)
    return CheckOutcome(
        "quadrature", converged < 1e-6 and coarse <= 1e-6,
        f"|ℓ{order} - ℓ{order + 20}| = {converged:.2e}, |ℓ30 - ℓ{order}|/|ℓ| = {coarse:.2e}",
        {"absolute_change": converged, "relative_change_30": coarse},
    )


def check_mc_vs_quadrature(ctx: CheckContext) -> CheckOutcome:
    worst = 0.0
    for k, (beta, sigma2) in enumerate(((3.07, 10.279), (2.51, 10.279), (-2.0, 12.25), (0.0, 1.0))):
        z = StreamRNG(ctx.seed, 3, k).standard_normal(10_000)
        mc = float(success_probability_from_draws(beta, sigma2, z))
        exact = float(success_probability_quadrature(beta, sigma2, order=50))
        se = mc_standard_error(beta, sigma2, z)
        worst = max(worst, abs(mc - exact) / max(se, 1e-12))
    return CheckOutcome(
        "mc_vs_quadrature", worst <= 4.0,
        f"max |MC - quadrature| = {worst:.2f} standard errors", {"max_z": worst},
    )


def check_single_subset(ctx: CheckContext) -> CheckOutcome:
    rng = StreamRNG(ctx.seed, 4)
    data = random_table(rng, n_experts=20, n_clusters=6)
    options = FitOptions(quadrature_order=20)
    spec = PartitionSpec(subset_size=2, permutations=1, mc_draws=100, seed=ctx.seed)
    pooled, _ = run_procedure(data, spec, options, partitions=[Partition.single(data.cluster_index)])
    fit = fit_ml(data, options)
    same = pooled.beta == fit.params.beta and pooled.sigma2 == fit.sigma2
    return CheckOutcome(
        "S=1 equals full ML", bool(same),
        f"σ̂² split {pooled.sigma2:.10g}, ML {fit.sigma2:.10g}",
    )


def check_partition(ctx: CheckContext) -> CheckOutcome:
    ids = list(range(1, 24))
    for w in range(10):
        p = make_partition(ids, 5, StreamRNG(ctx.seed, 5, w))
        flat = [c for subset in p.subsets for c in subset]
        if sorted(flat) != ids or len(set(flat)) != len(flat):
            return CheckOutcome("partition", False, f"permutation {w} is not a partition of 1..23")
        if any(len(s) > 5 or len(s) == 0 for s in p.subsets) or p.n_subsets != 5:
            return CheckOutcome("partition", False, f"permutation {w} has wrong subset sizes")
    again = make_partition(ids, 5, StreamRNG(ctx.seed, 5, 0))
    first = make_partition(ids, 5, StreamRNG(ctx.seed, 5, 0))
    if again != first:
        return CheckOutcome("partition", False, "same key gave different partitions")
    return CheckOutcome("partition", True, "10 partitions disjoint, covering, reproducible")


CHECK_REGISTRY: Dict[str, Callable[[CheckContext], CheckOutcome]] = {
    "gradient": check_gradient,
    "hessian": check_hessian,
    "quadrature": check_quadrature,
    "mc_vs_quadrature": check_mc_vs_quadrature,
    "S=1 equals full ML": check_single_subset,
    "partition": check_partition,
}


def run_checks(
    ctx: Optional[CheckContext] = None,
    names: Optional[List[str]] = None,
    logger: Optional[EventLogger] = None,
) -> List[CheckOutcome]:
    """
    Uruchamia wybrane (domyślnie wszystkie) testy w kolejności rejestru.

    Wyjątek w teście liczy się jako porażka tego testu.
    """
    ctx = ctx or CheckContext()
    outcomes: List[CheckOutcome] = []
    for name, check in CHECK_REGISTRY.items():
        if names is not None and name not in names:
            continue
        try:
            outcome = check(ctx)
        except Exception as e:  # noqa: BLE001
            outcome = CheckOutcome(name, False, f"{type(e).__name__}: {e}")
        outcomes.append(outcome)
        if logger is not None:
            logger.log_event(
                EventType.CHECK_PASSED if outcome.passed else EventType.CHECK_FAILED,
                subject=name, detail=outcome.detail, **outcome.data,
            )
    return outcomes


def run_selfcheck(ctx: Optional[CheckContext] = None) -> Tuple[int, List[CheckOutcome]]:
    """
    Wypisuje PASS/FAIL per test.

    Returns:
        (kod wyjścia, wyniki) - kod 0 tylko gdy wszystkie testy przeszły
    """
    ctx = ctx or CheckContext()
    logger = EventLogger(seed=ctx.seed, command="selfcheck")

    print("=" * 60)
    print("SELFCHECK")
    print("=" * 60)
    outcomes = run_checks(ctx, logger=logger)
    for o in outcomes:
        print(f"  [{'PASS' if o.passed else 'FAIL'}] {o.name:<20} {o.detail}")

    failed = [o.name for o in outcomes if not o.passed]
    print()
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return 1, outcomes
    print(f"All {len(outcomes)} checks passed")
    return 0, outcomes

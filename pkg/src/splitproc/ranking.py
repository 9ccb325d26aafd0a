"""
Prawdopodobieństwa sukcesu klastrów, przedziały ufności i ranking.

Dla klastra j i permutacji w (losowania z strumienia (seed, w, j)):

    P̂_wj   = (1/Q) Σ_q logistic(β̂_wj + σ̂_w · z_q)
    CI_wj  = metoda delta w punkcie (β̂_wj, σ̂²_kw) z kowariancją
             podzbioru k, który zawierał j w permutacji w

    P̂_j    = (1/W) Σ_w P̂_wj
    CI_j   = combine_cis(CI_1j..CI_Wj, ci_mode)

Klastry z separacją: P̂ z przyciętego β, przedział zdegenerowany
[0,0] (same zera) albo [1,1] (same jedynki).
"""

from __future__ import annotations
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from ..core.rng import StreamRNG
from ..events.event_logger import EventLogger
from ..model.ratings import RatingsTable
from .intervals import (
    ConfidenceInterval,
    interval_from_derivatives,
    combine_cis,
    covariance_block,
    parameter_covariance,
    z_value,
)
from .partition import PartitionSpec
from .probability import probability_derivatives, success_probability_from_draws
from .procedure import PermutationResult, PooledEstimates


class RankKey(Enum):
    """Po czym sortujemy ranking."""
    PROB_HAT = "prob_hat"
    CI_LOWER = "ci_lower"


@dataclass(frozen=True)
class SuccessEstimate:
    """
    Oszacowanie dla jednego klastra.

    Attributes:
        cluster_id (int): Klaster
        beta_hat (float): β̂_j (średnia po W)
        prob_hat (float): P̂_j
        ci_lower (float): Dolna granica łączonego przedziału
        ci_upper (float): Górna granica
        rank (int): Pozycja wg prob_hat (1 = najlepszy)
        flagged_separation (bool): Same 0 albo same 1
        prob_observed (float): Odsetek jedynek w danych
        rank_ci_lower (int): Pozycja wg ci_lower
        ci_degenerate (bool): Przedział zwinięty do punktu
    """
    cluster_id: int
    beta_hat: float
    prob_hat: float
    ci_lower: float
    ci_upper: float
    rank: int = 0
    flagged_separation: bool = False
    prob_observed: float = float("nan")
    rank_ci_lower: int = 0
    ci_degenerate: bool = False


def rank_clusters(estimates: Sequence[SuccessEstimate], key: RankKey = RankKey.PROB_HAT) -> List[SuccessEstimate]:
    """
    Sortuje malejąco po kluczu; remisy rozstrzyga rosnące cluster_id.

    Ustawia `rank` (klucz prob_hat) albo `rank_ci_lower` (klucz ci_lower).

    Example:
        >>> a = SuccessEstimate(7, 0.0, 0.5, 0.4, 0.6)
        >>> b = SuccessEstimate(3, 0.0, 0.5, 0.4, 0.6)
        >>> [e.cluster_id for e in rank_clusters([a, b])]
        [3, 7]
    """
    key = RankKey(key)
    attr = "prob_hat" if key is RankKey.PROB_HAT else "ci_lower"
    target = "rank" if key is RankKey.PROB_HAT else "rank_ci_lower"
    ordered = sorted(estimates, key=lambda e: (-getattr(e, attr), e.cluster_id))
    return [replace(e, **{target: i}) for i, e in enumerate(ordered, start=1)]


def _cluster_estimate(
    cluster_id: int,
    beta_hat: float,
    prob_observed: float,
    separation: int,
    per_permutation: List[tuple],
    spec: PartitionSpec,
    z: float,
) -> SuccessEstimate:
    """
    per_permutation: (w, β̂_wj, σ̂²_w, σ̂²_kw, Σ_2x2) dla każdej permutacji.
    """
    probs = []
    intervals = []
    for w, beta_wj, sigma2_w, sigma2_kw, cov in per_permutation:
        draws = StreamRNG(spec.seed, w, cluster_id).standard_normal(spec.mc_draws)
        probs.append(success_probability_from_draws(beta_wj, sigma2_w, draws))
        if not separation:
            p, d_beta, d_sigma2 = probability_derivatives(beta_wj, sigma2_kw, draws)
            intervals.append(interval_from_derivatives(p, d_beta, d_sigma2, cov, z))

    prob_hat = float(np.mean(probs))
    if separation:
        ci = ConfidenceInterval.point(0.0 if separation < 0 else 1.0)
    else:
        ci = combine_cis(intervals, spec.ci_mode)

    return SuccessEstimate(
        cluster_id=cluster_id,
        beta_hat=beta_hat,
        prob_hat=prob_hat,
        ci_lower=ci.lower,
        ci_upper=ci.upper,
        flagged_separation=bool(separation),
        prob_observed=prob_observed,
        ci_degenerate=ci.degenerate,
    )


def estimate_success(
    data: RatingsTable,
    pooled: PooledEstimates,
    results: Sequence[PermutationResult],
    spec: PartitionSpec,
    n_jobs: int = 1,
    logger: Optional[EventLogger] = None,
) -> List[SuccessEstimate]:
    """
    Końcowe P̂_j z przedziałami dla wszystkich klastrów, w kolejności rankingu.

    Args:
        data: Tabela ocen (do P obserwowanego i separacji)
        pooled: Wynik pool_permutations()
        results: Permutacje z run_procedure()
        spec: Ustawienia (Q, seed, poziom, tryb łączenia)
        n_jobs: Procesy joblib
        logger: Log zdarzeń (zdegenerowane przedziały)

    Returns:
        Lista SuccessEstimate posortowana po prob_hat (rank = 1..N)
    """
    z = z_value(spec.effective_level)
    observed = data.observed_probability()
    separated = data.separated_clusters()

    # (w, j) -> argumenty; kowariancja raz na podzbiór
    inputs: Dict[int, List[tuple]] = {int(c): [] for c in data.cluster_index}
    for r in results:
        for sf in r.subset_fits:
            cov_full = parameter_covariance(sf.fit)
            for cid in sf.cluster_ids:
                cid = int(cid)
                block = covariance_block(sf.fit, cid, cov_full)
                inputs[cid].append((r.index, r.beta_w[cid], r.sigma2_w, sf.sigma2, block))

    clusters = sorted(inputs)
    estimates = Parallel(n_jobs=n_jobs)(
        delayed(_cluster_estimate)(
            cid, pooled.beta[cid], observed[cid], separated.get(cid, 0), inputs[cid], spec, z
        )
        for cid in clusters
    )

    if logger is not None:
        for est in estimates:
            if est.ci_degenerate:
                logger.log_degenerate_interval(est.cluster_id, est.prob_hat)

    by_lower = {e.cluster_id: e.rank_ci_lower for e in rank_clusters(estimates, RankKey.CI_LOWER)}
    ranked = rank_clusters(estimates, RankKey.PROB_HAT)
    return [replace(e, rank_ci_lower=by_lower[e.cluster_id]) for e in ranked]

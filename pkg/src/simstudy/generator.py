"""
Generator danych symulowanych.

Dla każdej replikacji i każdego eksperta i = 1..n:

    n_i  ~ Poisson(ratings_mean), losowane ponownie aż n_i ∈ [min, max]
    b_i  ~ N(0, σ²)
    Λ_i  = n_i różnych klastrów wybranych jednostajnie bez zwracania
    Y_ij ~ Bernoulli(logistic(β_j + b_i))  dla j ∈ Λ_i

Prawdziwe β są losowane RAZ na badanie (draw_true_betas) i stałe we
wszystkich replikacjach. Identyfikatory: klastry 1..N, eksperci 1..n.
"""

from __future__ import annotations
from typing import Dict, Optional

import numpy as np
from scipy.special import expit

from ..core.rng import StreamRNG
from ..model.ratings import RatingsTable
from .config import STREAM_DATASET, STREAM_TRUE_BETAS, SimConfig


def draw_true_betas(config: SimConfig, rng: Optional[StreamRNG] = None) -> Dict[int, float]:
    """
    Prawdziwe efekty klastrów β_j ~ N(beta_mean, beta_var).

    Args:
        config: Ustawienia badania
        rng: Strumień (None = (master_seed, 0))

    Returns:
        Dict: cluster_id (1..N) -> β_j
    """
    rng = rng or StreamRNG(config.master_seed, STREAM_TRUE_BETAS)
    values = rng.normal(config.beta_mean, config.beta_var, config.n_clusters)
    return {j + 1: float(v) for j, v in enumerate(values)}


def _truncated_poisson(rng: StreamRNG, config: SimConfig) -> int:
    while True:
        n_i = rng.poisson(config.ratings_mean)
        if config.ratings_min <= n_i <= config.ratings_max:
            return n_i


def generate_dataset(config: SimConfig, true_betas: Dict[int, float], replication_index: int) -> RatingsTable:
    """
    Jedna replikacja danych (strumień (master_seed, 1, replication_index)).
    """
    rng = StreamRNG(config.master_seed, STREAM_DATASET, replication_index)
    beta = np.array([true_betas[j] for j in range(1, config.n_clusters + 1)])

    experts, clusters, ratings = [], [], []
    for expert in range(1, config.n_experts + 1):
        n_i = _truncated_poisson(rng, config)
        b_i = float(rng.normal(0.0, config.sigma2_true, 1)[0])
        chosen = np.sort(rng.choice_without_replacement(config.n_clusters, n_i))
        y = rng.bernoulli(expit(beta[chosen] + b_i))
        experts.append(np.full(n_i, expert, dtype=np.int64))
        clusters.append(chosen + 1)
        ratings.append(y)

    return RatingsTable.from_arrays(
        np.concatenate(experts),
        np.concatenate(clusters),
        np.concatenate(ratings),
    )

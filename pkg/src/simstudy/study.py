"""
Badanie symulacyjne: pełna ML kontra procedura podziału.

Dla każdej replikacji r (niezależne zadania joblib):

    1. dane      = generate_dataset(config, β, r)
    2. pełna ML  = fit_ml(dane)
                   P̂ML_j i CI metodą delta z pełnego hesjanu
    3. procedura = run_procedure + estimate_success
    4. zapis β̂, P̂, granic CI obu metod

Agregacja (w kolejności replikacji, niezależnie od n_jobs):

    • średnie β̂ i P̂ per klaster
    • pokrycie: odsetek replikacji z P_j ∈ CI
        powyżej = CI leży nad prawdą (P_j < lower)
        poniżej = CI leży pod prawdą (P_j > upper)
    • różnice względne (β̂ - β)/β
    • σ̂² obu metod

Replikacje z niezbieżną pełną ML są wykluczane ze średnich ML
(liczba wykluczeń trafia do raportu).
"""

from __future__ import annotations
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..core.rng import StreamRNG
from ..events.event_logger import EventLogger, EventType
from ..model.fitting import FitOptions, FitResult, fit_ml
from ..splitproc.intervals import (
    covariance_block,
    interval_from_derivatives,
    parameter_covariance,
    z_value,
)
from ..splitproc.probability import probability_derivatives, success_probability_quadrature
from ..splitproc.procedure import run_procedure
from ..splitproc.ranking import estimate_success
from .config import STREAM_ML_DRAWS, STREAM_SPLIT_SEED, SimConfig
from .generator import draw_true_betas, generate_dataset

METHODS = ("ml", "split")


@dataclass
class ReplicationOutcome:
    """
    Wyniki jednej replikacji (wektory w kolejności klastrów 1..N, NaN gdy
    klaster nie dostał żadnej oceny).
    """
    index: int
    beta: Dict[str, np.ndarray]
    prob: Dict[str, np.ndarray]
    lower: Dict[str, np.ndarray]
    upper: Dict[str, np.ndarray]
    sigma2: Dict[str, float]
    ml_converged: bool
    failed_subsets: int = 0


@dataclass
class SimReport:
    """
    Raport badania.

    Attributes:
        config (SimConfig): Ustawienia
        clusters (pd.DataFrame): Wiersz na klaster (prawda, średnie, pokrycie)
        relative_differences (pd.DataFrame): Szereg (β̂-β)/β per replikacja
        summary (Dict): σ² i statystyki globalne
        excluded_ml (List[int]): Replikacje bez zbieżności pełnej ML
    """
    config: SimConfig
    clusters: pd.DataFrame
    relative_differences: pd.DataFrame
    summary: Dict[str, Any] = field(default_factory=dict)
    excluded_ml: List[int] = field(default_factory=list)


def _ml_estimates(fit: FitResult, config: SimConfig, replication: int, z: float):
    """P̂ i CI pełnej ML dla klastrów obecnych w dopasowaniu."""
    cov_full = parameter_covariance(fit)
    sigma2 = fit.sigma2
    separated = fit.separation_flags
    q = config.split_spec.mc_draws
    result = {}
    for cid in fit.cluster_index:
        cid = int(cid)
        beta = fit.params.beta[cid]
        draws = StreamRNG(config.master_seed, STREAM_ML_DRAWS, replication, cid).standard_normal(q)
        p, d_beta, d_sigma2 = probability_derivatives(beta, sigma2, draws)
        if cid in separated:
            lo = hi = 0.0 if beta < 0 else 1.0
        else:
            ci = interval_from_derivatives(p, d_beta, d_sigma2, covariance_block(fit, cid, cov_full), z)
            lo, hi = ci.lower, ci.upper
        result[cid] = (beta, p, lo, hi)
    return result


def run_replication(
    config: SimConfig,
    true_betas: Dict[int, float],
    replication: int,
    options: Optional[FitOptions] = None,
) -> ReplicationOutcome:
    """Jedna replikacja: dane, pełna ML, procedura podziału."""
    options = options or FitOptions()
    n = config.n_clusters
    data = generate_dataset(config, true_betas, replication)

    outcome = ReplicationOutcome(
        index=replication,
        beta={m: np.full(n, np.nan) for m in METHODS},
        prob={m: np.full(n, np.nan) for m in METHODS},
        lower={m: np.full(n, np.nan) for m in METHODS},
        upper={m: np.full(n, np.nan) for m in METHODS},
        sigma2={},
        ml_converged=False,
    )

    level = config.split_spec.effective_level
    fit = fit_ml(data, options)
    outcome.ml_converged = fit.converged
    outcome.sigma2["ml"] = fit.sigma2
    for cid, (beta, p, lo, hi) in _ml_estimates(fit, config, replication, z_value(level)).items():
        pos = cid - 1
        outcome.beta["ml"][pos], outcome.prob["ml"][pos] = beta, p
        outcome.lower["ml"][pos], outcome.upper["ml"][pos] = lo, hi

    seed = int(StreamRNG(config.master_seed, STREAM_SPLIT_SEED, replication).generator.integers(2**63))
    spec = replace(config.split_spec, seed=seed)
    pooled, results = run_procedure(data, spec, options)
    outcome.sigma2["split"] = pooled.sigma2
    outcome.failed_subsets = pooled.diagnostics.get("failed_subsets_total", 0)
    for est in estimate_success(data, pooled, results, spec):
        pos = est.cluster_id - 1
        outcome.beta["split"][pos], outcome.prob["split"][pos] = est.beta_hat, est.prob_hat
        outcome.lower["split"][pos], outcome.upper["split"][pos] = est.ci_lower, est.ci_upper
    return outcome


def run_study(
    config: SimConfig,
    options: Optional[FitOptions] = None,
    n_jobs: int = 1,
    logger: Optional[EventLogger] = None,
) -> SimReport:
    """
    Wykonuje wszystkie replikacje i agreguje raport.

    Example:
        >>> report = run_study(SimConfig(replications=2), n_jobs=2)
        >>> list(report.clusters.columns[:3])
        ['rank', 'cluster_id', 'beta_true']
    """
    options = options or FitOptions()
    true_betas = draw_true_betas(config)
    outcomes: List[ReplicationOutcome] = Parallel(n_jobs=n_jobs)(
        delayed(run_replication)(config, true_betas, r, options)
        for r in range(config.replications)
    )

    excluded = [o.index for o in outcomes if not o.ml_converged]
    if logger is not None:
        for o in outcomes:
            if o.ml_converged:
                logger.log_event(
                    EventType.REPLICATION_DONE, subject=f"r{o.index}",
                    sigma2_ml=o.sigma2["ml"], sigma2_split=o.sigma2["split"],
                    failed_subsets=o.failed_subsets,
                )
            else:
                logger.log_event(EventType.REPLICATION_EXCLUDED, subject=f"r{o.index}",
                                 reason="full ML did not converge")

    return aggregate(config, true_betas, outcomes, excluded)


def aggregate(
    config: SimConfig,
    true_betas: Dict[int, float],
    outcomes: List[ReplicationOutcome],
    excluded: List[int],
) -> SimReport:
    """Składa raport z wyników replikacji (kolejność replikacji ustalona)."""
    ids = np.arange(1, config.n_clusters + 1)
    beta_true = np.array([true_betas[j] for j in ids])
    prob_true = np.asarray(success_probability_quadrature(beta_true, config.sigma2_true, order=50))

    keep = {"ml": [o for o in outcomes if o.ml_converged], "split": list(outcomes)}
    table = {"cluster_id": ids, "beta_true": beta_true}
    for m in METHODS:
        betas, probs = _stack(keep[m], "beta", m, len(ids)), _stack(keep[m], "prob", m, len(ids))
        lowers, uppers = _stack(keep[m], "lower", m, len(ids)), _stack(keep[m], "upper", m, len(ids))
        with np.errstate(invalid="ignore", divide="ignore"):
            rated = ~np.isnan(lowers)
            counts = rated.sum(axis=0)
            covered = ((lowers <= prob_true) & (prob_true <= uppers)).sum(axis=0)
            above = (lowers > prob_true).sum(axis=0)
            below = (uppers < prob_true).sum(axis=0)
            table[f"beta_{m}_mean"] = _nanmean(betas)
            table[f"prob_{m}_mean"] = _nanmean(probs)
            table[f"coverage_{m}"] = covered / counts
            table[f"above_{m}"] = above / counts
            table[f"below_{m}"] = below / counts
            table[f"reldiff_{m}_mean"] = _nanmean((betas - beta_true) / beta_true)
    table["prob_true"] = prob_true

    clusters = pd.DataFrame(table)
    clusters = clusters.sort_values(["beta_true", "cluster_id"], ascending=[False, True], kind="mergesort")
    clusters.insert(0, "rank", np.arange(1, len(clusters) + 1))
    clusters = clusters.reset_index(drop=True)

    rows = []
    for o in outcomes:
        for m in METHODS:
            if m == "ml" and not o.ml_converged:
                continue
            for pos, cid in enumerate(ids):
                rows.append({
                    "replication": o.index,
                    "cluster_id": int(cid),
                    "method": m,
                    "relative_difference": (o.beta[m][pos] - beta_true[pos]) / beta_true[pos],
                })
    reldiff = pd.DataFrame(rows, columns=["replication", "cluster_id", "method", "relative_difference"])

    split_minus_ml = [
        np.nanmean(np.abs(o.beta["split"] - o.beta["ml"])) for o in keep["ml"]
    ]
    summary = {
        "replications": len(outcomes),
        "excluded_ml": len(excluded),
        "sigma2_true": config.sigma2_true,
        "sigma2_ml_mean": float(np.mean([o.sigma2["ml"] for o in keep["ml"]])) if keep["ml"] else None,
        "sigma2_split_mean": float(np.mean([o.sigma2["split"] for o in outcomes])),
        "mean_abs_split_minus_ml": float(np.mean(split_minus_ml)) if split_minus_ml else None,
        "failed_subsets_total": int(sum(o.failed_subsets for o in outcomes)),
    }
    return SimReport(
        config=config,
        clusters=clusters,
        relative_differences=reldiff,
        summary=summary,
        excluded_ml=excluded,
    )


def _stack(outcomes: List[ReplicationOutcome], attr: str, method: str, n_clusters: int) -> np.ndarray:
    """Macierz replikacje × klastry dla jednej metody."""
    return np.array([getattr(o, attr)[method] for o in outcomes], dtype=float).reshape(len(outcomes), n_clusters)


def _nanmean(matrix: np.ndarray) -> np.ndarray:
    """Średnia po replikacjach ignorująca NaN (NaN gdy brak wartości)."""
    counts = (~np.isnan(matrix)).sum(axis=0)
    sums = np.nansum(matrix, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)

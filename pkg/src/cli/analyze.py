"""
Podkomenda analyze - procedura podziału na pliku ocen.

Pliki wynikowe (output_dir):
    ranking.csv      - wiersz na klaster, posortowane po rank
    summary.json     - σ̂², σ̂²_w, diagnostyka, ustawienia, seed, log zdarzeń
    histogram.csv    - histogram P̂ (rozkład prawdopodobieństw sukcesu)
    id_map.json      - seed, ustawienia i gęste id -> etykiety (null, gdy plik ich nie niósł)
    sensitivity.csv  - (opcjonalnie) porównanie z innym N_k
    ml_check.csv     - (opcjonalnie) porównanie z pełną ML na podzbiorze
"""

from __future__ import annotations
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import sys

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

from ..core.output import write_csv, write_json
from ..core.rng import StreamRNG
from ..events.event_logger import EventLogger, EventType
from ..ingest.loader import load_ratings, load_weights, save_id_map
from ..ingest.weights import compute_weights
from ..model.ratings import RatingsTable
from ..splitproc.partition import PartitionSpec
from ..splitproc.procedure import PooledEstimates, compare_with_full_ml, run_procedure
from ..splitproc.ranking import SuccessEstimate, estimate_success
from .config import RunConfig

# Klucz strumienia wyboru klastrów do porównania z pełną ML
# (nie koliduje z kluczami permutacji (seed, w))
ML_CHECK_STREAM = -1


def _analyze_once(
    data: RatingsTable,
    config: RunConfig,
    spec: PartitionSpec,
    logger: Optional[EventLogger],
) -> Tuple[PooledEstimates, List[SuccessEstimate]]:
    pooled, results = run_procedure(
        data, spec, config.fit_options(), n_jobs=config.n_jobs, logger=logger
    )
    estimates = estimate_success(data, pooled, results, spec, n_jobs=config.n_jobs, logger=logger)
    return pooled, estimates


def ranking_frame(data: RatingsTable, estimates: List[SuccessEstimate]) -> pd.DataFrame:
    """Tabela rankingu z etykietami klastrów z pliku wejściowego."""
    label = data.id_map.cluster_label if data.id_map is not None else str
    return pd.DataFrame({
        "cluster_id": [label(e.cluster_id) for e in estimates],
        "beta_hat": [e.beta_hat for e in estimates],
        "prob_estimated": [e.prob_hat for e in estimates],
        "prob_observed": [e.prob_observed for e in estimates],
        "ci_lower": [e.ci_lower for e in estimates],
        "ci_upper": [e.ci_upper for e in estimates],
        "rank": [e.rank for e in estimates],
        "rank_ci_lower": [e.rank_ci_lower for e in estimates],
        "separation_flag": [int(e.flagged_separation) for e in estimates],
    })


def histogram_frame(estimates: List[SuccessEstimate], bins: int) -> pd.DataFrame:
    counts, edges = np.histogram([e.prob_hat for e in estimates], bins=bins, range=(0.0, 1.0))
    return pd.DataFrame({"bin_lower": edges[:-1], "bin_upper": edges[1:], "count": counts})


def _pooled_summary(pooled: PooledEstimates) -> Dict[str, Any]:
    return {
        "sigma2": pooled.sigma2,
        "sigma2_w": [p["sigma2_w"] for p in pooled.diagnostics["permutations"]],
        "separated_clusters": len(pooled.separation_flags),
        "diagnostics": pooled.diagnostics,
    }


def run_analyze(config: RunConfig) -> int:
    """
    Wykonuje analizę i zapisuje pliki wynikowe.

    Returns:
        Kod wyjścia (0 = sukces, także przy częściowym braku zbieżności)
    """
    out = Path(config.output_dir)
    settings = config.model_dump()
    spec = config.partition_spec()
    logger = EventLogger(seed=config.seed, command="analyze")

    print("=" * 60)
    print("ANALYZE")
    print("=" * 60)

    loaded = load_ratings(config.input_path, config.format_options())
    # wagi z pliku towarzyszącego trafiają tylko do analizy ważonej
    data = loaded.with_weights(None)
    print(f"Ratings: {data.n_entries} entries, {data.n_experts} experts, {data.n_clusters} clusters")
    print(f"N_k={spec.subset_size}, W={spec.permutations}, Q={spec.mc_draws}, "
          f"S={spec.n_subsets(data.n_clusters)}, seed={spec.seed}")
    logger.log_event(
        EventType.RUN_START,
        entries=data.n_entries, experts=data.n_experts, clusters=data.n_clusters,
    )

    pooled, estimates = _analyze_once(data, config, spec, logger)
    ranking = ranking_frame(data, estimates)
    summary: Dict[str, Any] = {
        "seed": config.seed,
        "settings": settings,
        "data": {"entries": data.n_entries, "experts": data.n_experts, "clusters": data.n_clusters},
        "unweighted": _pooled_summary(pooled),
    }
    print(f"σ̂² = {pooled.sigma2:.4f}")

    # ─────────────────────────────────────────────────────────────────────
    # ANALIZA WAŻONA (porównanie z nieważoną)
    # ─────────────────────────────────────────────────────────────────────
    if config.weighted:
        if config.weights_path:
            weights = load_weights(config.weights_path, data, config.delimiter)
        elif loaded.is_weighted:
            weights = loaded.weights
        else:
            weights = compute_weights(data)
        pooled_w, estimates_w = _analyze_once(data.with_weights(weights), config, spec, None)
        by_id = {e.cluster_id: e for e in estimates_w}
        ordered = [by_id[e.cluster_id] for e in estimates]
        ranking["beta_hat_weighted"] = [e.beta_hat for e in ordered]
        ranking["prob_weighted"] = [e.prob_hat for e in ordered]
        ranking["ci_lower_weighted"] = [e.ci_lower for e in ordered]
        ranking["ci_upper_weighted"] = [e.ci_upper for e in ordered]
        ranking["rank_weighted"] = [e.rank for e in ordered]
        summary["weighted"] = _pooled_summary(pooled_w)
        print(f"σ̂² (weighted) = {pooled_w.sigma2:.4f}")

    # ─────────────────────────────────────────────────────────────────────
    # WRAŻLIWOŚĆ NA N_k
    # ─────────────────────────────────────────────────────────────────────
    if config.sensitivity_nk is not None:
        alt_spec = config.partition_spec(subset_size=config.sensitivity_nk)
        pooled_alt, estimates_alt = _analyze_once(data, config, alt_spec, None)
        by_id = {e.cluster_id: e for e in estimates_alt}
        ordered = [by_id[e.cluster_id] for e in estimates]
        label = data.id_map.cluster_label if data.id_map is not None else str
        sensitivity = pd.DataFrame({
            "cluster_id": [label(e.cluster_id) for e in estimates],
            "beta_hat": [e.beta_hat for e in estimates],
            "prob_estimated": [e.prob_hat for e in estimates],
            "rank": [e.rank for e in estimates],
            "beta_hat_alt": [e.beta_hat for e in ordered],
            "prob_estimated_alt": [e.prob_hat for e in ordered],
            "rank_alt": [e.rank for e in ordered],
        })
        correlation = spearmanr(sensitivity["rank"], sensitivity["rank_alt"]).correlation
        write_csv(sensitivity, out / "sensitivity.csv", config.seed, settings, config.float_format)
        summary["sensitivity"] = {
            "subset_size": config.sensitivity_nk,
            "sigma2": pooled_alt.sigma2,
            "rank_correlation": float(correlation),
        }
        print(f"N_k={config.sensitivity_nk}: σ̂² = {pooled_alt.sigma2:.4f}, "
              f"rank correlation = {correlation:.4f}")

    # ─────────────────────────────────────────────────────────────────────
    # PORÓWNANIE Z PEŁNĄ ML NA PODZBIORZE KLASTRÓW
    # ─────────────────────────────────────────────────────────────────────
    if config.ml_check_clusters is not None:
        k = min(config.ml_check_clusters, data.n_clusters)
        chosen = StreamRNG(config.seed, ML_CHECK_STREAM).permutation(list(map(int, data.cluster_index)))[:k]
        check = compare_with_full_ml(data, pooled, chosen, config.fit_options())
        frame = pd.DataFrame(check.rows)
        if data.id_map is not None:
            frame["cluster_id"] = [data.id_map.cluster_label(c) for c in frame["cluster_id"]]
        frame["separation_flag"] = frame["separation_flag"].astype(int)
        write_csv(frame, out / "ml_check.csv", config.seed, settings, config.float_format)
        summary["ml_check"] = {
            "clusters": k,
            "sigma2_ml": check.sigma2_ml,
            "sigma2_split": check.sigma2_split,
            "mean_abs_beta_difference": check.mean_abs_difference,
            "converged": check.converged,
        }

    # ─────────────────────────────────────────────────────────────────────
    # ZAPIS
    # ─────────────────────────────────────────────────────────────────────
    failed = pooled.diagnostics["failed_subsets_total"]
    if failed:
        print(f"WARNING: {failed} of {pooled.diagnostics['subsets_total']} subset fits "
              f"did not converge", file=sys.stderr)
    logger.log_event(EventType.RUN_END, sigma2=pooled.sigma2, failed_subsets=failed)
    summary["log"] = logger.to_dict()

    write_csv(ranking, out / "ranking.csv", config.seed, settings, config.float_format)
    write_csv(histogram_frame(estimates, config.histogram_bins), out / "histogram.csv",
              config.seed, settings, config.float_format)
    write_json(summary, out / "summary.json")
    save_id_map(data.id_map, str(out / "id_map.json"), config.seed, settings)

    print()
    print("Top 10:")
    for row in ranking.head(10).itertuples(index=False):
        print(f"  {row.rank:>4}  {row.cluster_id:>12}  P̂={row.prob_estimated:.3f} "
              f"[{row.ci_lower:.3f}, {row.ci_upper:.3f}]  observed={row.prob_observed:.3f}")
    print()
    print(f"Output written to {out}/")
    return 0

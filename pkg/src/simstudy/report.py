"""
Zapis raportu badania symulacyjnego.

Pliki:
    sim_estimates.csv             - β prawdziwe i średnie β̂ obu metod
    sim_probabilities.csv         - P prawdziwe, średnie P̂, pokrycie CI
    sim_relative_differences.csv  - (β̂-β)/β per replikacja (do wykresów)
    sim_summary.json              - σ², wykluczenia, ustawienia, log
"""

from __future__ import annotations
from pathlib import Path
from typing import Any, Dict, Optional

from ..core.output import write_csv, write_json
from ..events.event_logger import EventLogger
from .study import SimReport

ESTIMATE_COLUMNS = [
    "rank", "cluster_id", "beta_true", "beta_ml_mean", "beta_split_mean",
    "reldiff_ml_mean", "reldiff_split_mean",
]
PROBABILITY_COLUMNS = [
    "rank", "cluster_id", "prob_true", "prob_ml_mean", "prob_split_mean",
    "coverage_ml", "above_ml", "below_ml",
    "coverage_split", "above_split", "below_split",
]


def write_sim_report(
    report: SimReport,
    output_dir: str,
    float_format: str = "%.10g",
    logger: Optional[EventLogger] = None,
) -> Dict[str, Path]:
    """
    Zapisuje wszystkie pliki raportu do output_dir.

    Returns:
        Dict: nazwa -> ścieżka zapisanego pliku
    """
    out = Path(output_dir)
    seed = report.config.master_seed
    settings: Dict[str, Any] = report.config.to_dict()

    paths = {
        "estimates": write_csv(report.clusters[ESTIMATE_COLUMNS], out / "sim_estimates.csv",
                               seed, settings, float_format),
        "probabilities": write_csv(report.clusters[PROBABILITY_COLUMNS], out / "sim_probabilities.csv",
                                   seed, settings, float_format),
        "relative_differences": write_csv(report.relative_differences,
                                          out / "sim_relative_differences.csv",
                                          seed, settings, float_format),
    }

    summary = {
        "seed": seed,
        "settings": settings,
        "summary": report.summary,
        "excluded_ml_replications": report.excluded_ml,
    }
    if logger is not None:
        summary["log"] = logger.to_dict()
    paths["summary"] = write_json(summary, out / "sim_summary.json")
    return paths

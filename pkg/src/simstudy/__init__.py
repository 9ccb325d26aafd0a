"""
Badanie symulacyjne procedury.

Zawiera:
- SimConfig: Ustawienia badania
- draw_true_betas, generate_dataset: Generator danych
- run_study, SimReport: Replikacje i agregacja
- write_sim_report: Pliki CSV/JSON raportu
"""

from .config import SimConfig
from .generator import draw_true_betas, generate_dataset
from .study import ReplicationOutcome, SimReport, run_replication, run_study, aggregate
from .report import write_sim_report

__all__ = [
    "SimConfig", "draw_true_betas", "generate_dataset",
    "ReplicationOutcome", "SimReport", "run_replication", "run_study", "aggregate",
    "write_sim_report",
]

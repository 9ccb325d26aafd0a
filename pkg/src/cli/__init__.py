"""
CLI - podkomendy analyze, simulate, selfcheck.

Zawiera:
- RunConfig, SimulateRunConfig: Walidowane ustawienia (pydantic)
- run_analyze: Ranking klastrów z pliku ocen
- run_simulate: Badanie symulacyjne
- run_selfcheck, CHECK_REGISTRY: Wyrocznie numeryczne
"""

from .config import RunConfig, SimulateRunConfig
from .analyze import run_analyze, ranking_frame, histogram_frame
from .simulate import run_simulate
from .selfcheck import CHECK_REGISTRY, CheckContext, CheckOutcome, run_checks, run_selfcheck

__all__ = [
    "RunConfig", "SimulateRunConfig",
    "run_analyze", "ranking_frame", "histogram_frame",
    "run_simulate",
    "CHECK_REGISTRY", "CheckContext", "CheckOutcome", "run_checks", "run_selfcheck",
]

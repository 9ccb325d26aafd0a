"""
Walidowane ustawienia podkomend CLI (pydantic).

Słownik z ConfigLoader.effective_settings() (defaults < plik < flagi)
trafia do RunConfig / SimulateRunConfig. Zakresy pól odpowiadają
typom domenowym, które z nich powstają (FitOptions, PartitionSpec,
SimConfig). Nieznane klucze są błędem - literówka w pliku
konfiguracyjnym nie przechodzi po cichu.
"""

from __future__ import annotations
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config_loader import ConfigLoader
from ..ingest.loader import FormatOptions
from ..model.fitting import FitOptions
from ..simstudy.config import SimConfig
from ..splitproc.partition import PartitionSpec

ANALYZE_SECTIONS = ("fit", "split", "output", "input")
SIMULATE_SECTIONS = ("fit", "simulation", "output")


class _FitSettings(BaseModel):
    """Pola sekcji `fit` wspólne dla obu podkomend."""
    model_config = ConfigDict(extra="forbid")

    quadrature_order: int = Field(50, ge=1, le=200)
    adaptive: bool = True
    max_iter: int = Field(200, ge=1)
    grad_tol: float = Field(1e-6, gt=0)
    beta_cap: float = Field(15.0, gt=0)
    log_sigma_init: float = 0.0
    log_sigma_min: float = -8.0
    log_sigma_max: float = 4.0
    max_step: float = Field(5.0, gt=0)

    output_dir: str = "output/"
    histogram_bins: int = Field(20, ge=1)
    float_format: str = "%.10g"
    threads: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_sigma_bounds(self):
        if not self.log_sigma_min < self.log_sigma_max:
            raise ValueError("log_sigma_min must be smaller than log_sigma_max")
        if not self.log_sigma_min <= self.log_sigma_init <= self.log_sigma_max:
            raise ValueError("log_sigma_init must lie within [log_sigma_min, log_sigma_max]")
        return self

    def fit_options(self) -> FitOptions:
        return FitOptions.from_settings(self.model_dump())

    @property
    def n_jobs(self) -> int:
        """joblib n_jobs: 0 -> wszystkie rdzenie (-1)."""
        return -1 if self.threads == 0 else self.threads


class RunConfig(_FitSettings):
    """
    Ustawienia podkomendy analyze.

    Example:
        >>> cfg = RunConfig.from_sources(overrides={"input_path": "r.csv", "seed": 7})
        >>> cfg.partition_spec().seed
        7
    """
    input_path: str
    weights_path: Optional[str] = None

    subset_size: int = Field(30, ge=2)
    permutations: int = Field(20, ge=1)
    mc_draws: int = Field(10_000, ge=1)
    seed: int = Field(1, ge=0, lt=2**64)
    ci_level: float = Field(0.95, gt=0, lt=1)
    ci_mode: Literal["average", "union", "intersection"] = "average"
    bonferroni: bool = False
    weighted: bool = False

    sensitivity_nk: Optional[int] = Field(None, ge=2)
    ml_check_clusters: Optional[int] = Field(None, ge=2)

    delimiter: str = ","
    expert_column: str = "expert_id"
    cluster_column: str = "cluster_id"
    rating_column: str = "rating"

    def partition_spec(self, subset_size: Optional[int] = None) -> PartitionSpec:
        settings = self.model_dump()
        if subset_size is not None:
            settings["subset_size"] = subset_size
        return PartitionSpec.from_settings(settings)

    def format_options(self) -> FormatOptions:
        return FormatOptions(
            delimiter=self.delimiter,
            expert_column=self.expert_column,
            cluster_column=self.cluster_column,
            rating_column=self.rating_column,
        )

    @classmethod
    def from_sources(
        cls,
        config_path: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
        loader: Optional[ConfigLoader] = None,
    ) -> "RunConfig":
        loader = loader or ConfigLoader()
        return cls(**loader.effective_settings(ANALYZE_SECTIONS, config_path, overrides))


class SimulateRunConfig(_FitSettings):
    """Ustawienia podkomendy simulate."""
    n_clusters: int = Field(50, ge=3)
    n_experts: int = Field(147, ge=1)
    beta_mean: float = -2.0
    beta_var: float = Field(2.0, ge=0)
    sigma2_true: float = Field(12.25, ge=0)
    ratings_mean: float = Field(25.0, gt=0)
    ratings_min: int = Field(8, ge=1)
    ratings_max: int = Field(50, ge=1)
    replications: int = Field(200, ge=1)
    subset_size: int = Field(5, ge=2)
    permutations: int = Field(20, ge=1)
    mc_draws: int = Field(10_000, ge=1)
    master_seed: int = Field(2014, ge=0, lt=2**64)
    ci_level: float = Field(0.95, gt=0, lt=1)
    ci_mode: Literal["average", "union", "intersection"] = "average"
    bonferroni: bool = False

    @model_validator(mode="after")
    def _check_ranges(self):
        if not self.ratings_min <= self.ratings_max <= self.n_clusters:
            raise ValueError("need ratings_min ≤ ratings_max ≤ n_clusters")
        if not self.subset_size < self.n_clusters:
            raise ValueError("subset_size must be smaller than n_clusters")
        return self

    def sim_config(self) -> SimConfig:
        return SimConfig.from_settings(self.model_dump())

    @classmethod
    def from_sources(
        cls,
        config_path: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
        loader: Optional[ConfigLoader] = None,
    ) -> "SimulateRunConfig":
        loader = loader or ConfigLoader()
        return cls(**loader.effective_settings(SIMULATE_SECTIONS, config_path, overrides))

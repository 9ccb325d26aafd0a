"""
Konfiguracja badania symulacyjnego.

Domyślne wartości odtwarzają protokół badania referencyjnego:
N = 50 klastrów, n = 147 ekspertów, β_j ~ N(-2, 2), b_i ~ N(0, 12.25),
n_i ~ Poisson(25) obcięty do [8, 50], 200 replikacji, N_k = 5, W = 20,
Q = 10 000. Parametry rozkładów normalnych to (średnia, WARIANCJA).

Strumienie losowości (klucze StreamRNG):
    (master_seed, 0)        -> prawdziwe β (raz na całe badanie)
    (master_seed, 1, r)     -> dane replikacji r
    (master_seed, 2, r)     -> ziarno procedury podziału w replikacji r
    (master_seed, 3, r, j)  -> losowania MC dla P̂ pełnej ML
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict

from scipy.stats import poisson

from ..core.errors import InvalidArgumentError
from ..splitproc.partition import PartitionSpec

STREAM_TRUE_BETAS = 0
STREAM_DATASET = 1
STREAM_SPLIT_SEED = 2
STREAM_ML_DRAWS = 3

# Minimalne prawdopodobieństwo akceptacji losowania n_i (inaczej pętla
# odrzucania praktycznie się nie kończy)
MIN_ACCEPTANCE = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """
    Ustawienia badania.

    Attributes:
        n_clusters (int): N
        n_experts (int): n
        beta_mean (float): Średnia prawdziwych β
        beta_var (float): Wariancja prawdziwych β
        sigma2_true (float): Prawdziwe σ²
        ratings_mean (float): Średnia Poissona liczby ocen eksperta
        ratings_min (int): Dolna granica n_i
        ratings_max (int): Górna granica n_i
        replications (int): Liczba replikacji
        split_spec (PartitionSpec): Ustawienia procedury (seed ignorowany)
        master_seed (int): Ziarno całego badania
    """
    n_clusters: int = 50
    n_experts: int = 147
    beta_mean: float = -2.0
    beta_var: float = 2.0
    sigma2_true: float = 12.25
    ratings_mean: float = 25.0
    ratings_min: int = 8
    ratings_max: int = 50
    replications: int = 200
    split_spec: PartitionSpec = field(
        default_factory=lambda: PartitionSpec(subset_size=5, permutations=20, mc_draws=10_000)
    )
    master_seed: int = 2014

    def __post_init__(self):
        if self.n_clusters < 2:
            raise InvalidArgumentError(f"n_clusters must be ≥ 2, got {self.n_clusters}")
        if self.n_experts < 1:
            raise InvalidArgumentError(f"n_experts must be ≥ 1, got {self.n_experts}")
        if self.replications < 1:
            raise InvalidArgumentError(f"replications must be ≥ 1, got {self.replications}")
        if not 1 <= self.ratings_min <= self.ratings_max <= self.n_clusters:
            raise InvalidArgumentError(
                f"Need 1 ≤ ratings_min ≤ ratings_max ≤ n_clusters, got "
                f"{self.ratings_min}, {self.ratings_max}, {self.n_clusters}"
            )
        if self.beta_var < 0 or self.sigma2_true < 0:
            raise InvalidArgumentError("Variances must be ≥ 0")
        if not self.ratings_mean > 0:
            raise InvalidArgumentError(f"ratings_mean must be > 0, got {self.ratings_mean}")
        self.split_spec.validate_for(self.n_clusters)
        if self.acceptance_probability() < MIN_ACCEPTANCE:
            raise InvalidArgumentError(
                f"Poisson({self.ratings_mean}) almost never falls in "
                f"[{self.ratings_min}, {self.ratings_max}]"
            )

    def acceptance_probability(self) -> float:
        """P(ratings_min ≤ Poisson(ratings_mean) ≤ ratings_max)."""
        return float(
            poisson.cdf(self.ratings_max, self.ratings_mean)
            - poisson.cdf(self.ratings_min - 1, self.ratings_mean)
        )

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "SimConfig":
        """Buduje konfigurację ze spłaszczonej sekcji `simulation`."""
        return cls(
            n_clusters=int(settings.get("n_clusters", 50)),
            n_experts=int(settings.get("n_experts", 147)),
            beta_mean=float(settings.get("beta_mean", -2.0)),
            beta_var=float(settings.get("beta_var", 2.0)),
            sigma2_true=float(settings.get("sigma2_true", 12.25)),
            ratings_mean=float(settings.get("ratings_mean", 25.0)),
            ratings_min=int(settings.get("ratings_min", 8)),
            ratings_max=int(settings.get("ratings_max", 50)),
            replications=int(settings.get("replications", 200)),
            split_spec=PartitionSpec(
                subset_size=int(settings.get("subset_size", 5)),
                permutations=int(settings.get("permutations", 20)),
                mc_draws=int(settings.get("mc_draws", 10_000)),
                ci_level=float(settings.get("ci_level", 0.95)),
                ci_mode=settings.get("ci_mode", "average"),
                bonferroni=bool(settings.get("bonferroni", False)),
            ),
            master_seed=int(settings.get("master_seed", 2014)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_clusters": self.n_clusters,
            "n_experts": self.n_experts,
            "beta_mean": self.beta_mean,
            "beta_var": self.beta_var,
            "sigma2_true": self.sigma2_true,
            "ratings_mean": self.ratings_mean,
            "ratings_min": self.ratings_min,
            "ratings_max": self.ratings_max,
            "replications": self.replications,
            "split_spec": self.split_spec.to_dict(),
            "master_seed": self.master_seed,
        }

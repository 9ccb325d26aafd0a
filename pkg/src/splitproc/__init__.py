"""
Procedura permutacyjnego podziału próby.

Zawiera:
- PartitionSpec, Partition, make_partition: Losowy podział klastrów
- fit_permutation, run_procedure, pool_permutations: Dopasowania i uśrednianie
- success_probability*: Brzegowe prawdopodobieństwo sukcesu (MC i kwadratura)
- delta_method_ci, combine_cis: Przedziały ufności
- estimate_success, rank_clusters: Końcowe oszacowania i ranking
"""

from .partition import CIMode, PartitionSpec, Partition, make_partition
from .probability import (
    success_probability,
    success_probability_from_draws,
    success_probability_quadrature,
    probability_derivatives,
    probability_derivatives_quadrature,
    mc_standard_error,
)
from .intervals import (
    ConfidenceInterval,
    delta_method_ci,
    combine_cis,
    covariance_block,
    parameter_covariance,
    z_value,
)
from .procedure import (
    SubsetFit,
    PermutationResult,
    PooledEstimates,
    MLComparison,
    fit_permutation,
    run_procedure,
    pool_permutations,
    stability_diagnostics,
    compare_with_full_ml,
)
from .ranking import RankKey, SuccessEstimate, rank_clusters, estimate_success

__all__ = [
    "CIMode", "PartitionSpec", "Partition", "make_partition",
    "success_probability", "success_probability_from_draws",
    "success_probability_quadrature", "probability_derivatives",
    "probability_derivatives_quadrature", "mc_standard_error",
    "ConfidenceInterval", "delta_method_ci", "combine_cis",
    "covariance_block", "parameter_covariance", "z_value",
    "SubsetFit", "PermutationResult", "PooledEstimates", "MLComparison",
    "fit_permutation", "run_procedure", "pool_permutations",
    "stability_diagnostics", "compare_with_full_ml",
    "RankKey", "SuccessEstimate", "rank_clusters", "estimate_success",
]

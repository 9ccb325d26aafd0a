"""
Procedura permutacyjnego podziału próby.

KROKI:
═══════════════════════════════════════════════════════════════════

    dla w = 0..W-1:
        1. permutacja klastrów (strumień (seed, w)) i podział na S bloków
        2. dla każdego bloku k: dopasowanie ML na ocenach jego klastrów
           -> β̂_wj dla j ∈ C^k oraz σ̂²_kw
           σ̂²_w = średnia σ̂²_kw po zbieżnych podzbiorach
    3. uśrednienie po permutacjach:
           β̂_j = (1/W) Σ_w β̂_wj         σ̂² = (1/W) Σ_w σ̂²_w

RÓWNOLEGŁOŚĆ:
    Wszystkie dopasowania (w, k) są niezależne - idą jednym wywołaniem
    joblib.Parallel. Wyniki wracają w kolejności zleceń, a średnie są
    liczone w ustalonej kolejności, więc n_jobs nie zmienia wyników.
    Zdarzenia loguje wyłącznie proces główny.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..core.errors import InvalidPartitionError
from ..core.rng import StreamRNG
from ..events.event_logger import EventLogger
from ..model.fitting import FitOptions, FitResult, fit_ml
from ..model.ratings import RatingsTable
from .partition import Partition, PartitionSpec, make_partition


@dataclass(frozen=True)
class SubsetFit:
    """
    Dopasowanie jednego podzbioru C^k.

    Attributes:
        subset_index (int): k
        cluster_ids (Tuple[int, ...]): Klastry podzbioru
        fit (FitResult): Dopasowanie ML ograniczone do podzbioru
        expert_count (int): Liczba ekspertów z ≥ 1 oceną w podzbiorze
    """
    subset_index: int
    cluster_ids: Tuple[int, ...]
    fit: FitResult
    expert_count: int

    @property
    def sigma2(self) -> float:
        """σ̂²_k"""
        return self.fit.sigma2


@dataclass(frozen=True)
class PermutationResult:
    """
    Wszystkie dopasowania jednej permutacji.

    Attributes:
        index (int): w
        partition (Partition): Podział użyty w tej permutacji
        subset_fits (Tuple[SubsetFit, ...]): Dopasowania w kolejności k
        sigma2_w (float): Średnia σ̂²_k po zbieżnych podzbiorach
        beta_w (Dict[int, float]): cluster_id -> β̂_wj
    """
    index: int
    partition: Partition
    subset_fits: Tuple[SubsetFit, ...]
    sigma2_w: float
    beta_w: Dict[int, float]

    @property
    def failed_subsets(self) -> int:
        return sum(1 for sf in self.subset_fits if not sf.fit.converged)

    def subset_for(self) -> Dict[int, SubsetFit]:
        """cluster_id -> dopasowanie podzbioru, który go zawiera."""
        return {c: sf for sf in self.subset_fits for c in sf.cluster_ids}


@dataclass(frozen=True)
class PooledEstimates:
    """
    Estymatory uśrednione po W permutacjach.

    Attributes:
        beta (Dict[int, float]): β̂_j
        sigma2 (float): σ̂²
        permutations (int): W
        separation_flags (FrozenSet[int]): Klastry z separacją
        diagnostics (Dict): Diagnostyka stabilności uśredniania
    """
    beta: Dict[int, float]
    sigma2: float
    permutations: int
    separation_flags: FrozenSet[int] = frozenset()
    diagnostics: Dict[str, Any] = field(default_factory=dict)


# ═══════════════════════════════════════════════════════════════════════════
# DOPASOWANIE PERMUTACJI
# ═══════════════════════════════════════════════════════════════════════════

def _check_partition(data: RatingsTable, partition: Partition) -> None:
    ids = [c for subset in partition.subsets for c in subset]
    if len(ids) != len(set(ids)):
        raise InvalidPartitionError("Partition subsets are not disjoint")
    present = set(int(c) for c in data.cluster_index)
    extra = sorted(set(ids) - present)
    if extra:
        raise InvalidPartitionError(f"Subset contains cluster(s) with zero ratings: {extra[:10]}")
    missing = sorted(present - set(ids))
    if missing:
        raise InvalidPartitionError(f"Partition does not cover cluster(s) {missing[:10]}")
    for k, subset in enumerate(partition.subsets):
        if not subset:
            raise InvalidPartitionError(f"Subset {k} is empty")


def _fit_subset(restricted: RatingsTable, subset_index: int, cluster_ids: Tuple[int, ...], options: FitOptions) -> SubsetFit:
    if restricted.n_entries == 0:
        raise InvalidPartitionError(f"Subset {subset_index} has zero ratings")
    return SubsetFit(
        subset_index=subset_index,
        cluster_ids=tuple(cluster_ids),
        fit=fit_ml(restricted, options),
        expert_count=restricted.n_experts,
    )


def _assemble(index: int, partition: Partition, fits: Sequence[SubsetFit]) -> PermutationResult:
    beta_w: Dict[int, float] = {}
    for sf in fits:
        for cid in sf.cluster_ids:
            beta_w[int(cid)] = sf.fit.params.beta[int(cid)]
    converged = [sf.sigma2 for sf in fits if sf.fit.converged]
    # gdy żaden podzbiór nie jest zbieżny, średnia ze wszystkich
    values = converged if converged else [sf.sigma2 for sf in fits]
    return PermutationResult(
        index=index,
        partition=partition,
        subset_fits=tuple(fits),
        sigma2_w=float(np.mean(values)),
        beta_w=dict(sorted(beta_w.items())),
    )


def fit_permutation(
    data: RatingsTable,
    partition: Partition,
    options: Optional[FitOptions] = None,
    index: int = 0,
    n_jobs: int = 1,
) -> PermutationResult:
    """
    Dopasowuje model osobno w każdym podzbiorze podziału.

    Raises:
        InvalidPartitionError: Podział nie pokrywa dokładnie klastrów danych
    """
    options = options or FitOptions()
    _check_partition(data, partition)
    tables = data.split(partition.subsets)
    fits = Parallel(n_jobs=n_jobs)(
        delayed(_fit_subset)(table, k, subset, options)
        for k, (subset, table) in enumerate(zip(partition.subsets, tables))
    )
    return _assemble(index, partition, fits)


def run_procedure(
    data: RatingsTable,
    spec: PartitionSpec,
    options: Optional[FitOptions] = None,
    n_jobs: int = 1,
    partitions: Optional[Sequence[Partition]] = None,
    logger: Optional[EventLogger] = None,
) -> Tuple[PooledEstimates, List[PermutationResult]]:
    """
    Pełna procedura: W permutacji, dopasowania podzbiorów, uśrednienie.

    Args:
        data: Tabela ocen
        spec: Ustawienia podziału
        options: Ustawienia optymalizatora
        n_jobs: Liczba procesów joblib (nie wpływa na wyniki)
        partitions: Gotowe podziały zamiast losowych (np. Partition.single)
        logger: Opcjonalny log zdarzeń

    Returns:
        (PooledEstimates, lista PermutationResult w kolejności w)

    Raises:
        InvalidArgumentError: N_k ≥ N (gdy podziały są losowane)
        InvalidPartitionError: Podany podział nie pasuje do danych
    """
    options = options or FitOptions()
    if partitions is None:
        spec.validate_for(data.n_clusters)
        partitions = [
            make_partition(data.cluster_index, spec.subset_size, StreamRNG(spec.seed, w))
            for w in range(spec.permutations)
        ]
    for partition in partitions:
        _check_partition(data, partition)

    tasks = [
        (k, subset, table)
        for p in partitions
        for k, (subset, table) in enumerate(zip(p.subsets, data.split(p.subsets)))
    ]
    fits = Parallel(n_jobs=n_jobs)(
        delayed(_fit_subset)(table, k, subset, options) for k, subset, table in tasks
    )

    results: List[PermutationResult] = []
    offset = 0
    for w, partition in enumerate(partitions):
        chunk = fits[offset:offset + partition.n_subsets]
        offset += partition.n_subsets
        result = _assemble(w, partition, chunk)
        results.append(result)
        if logger is not None:
            for sf in chunk:
                logger.log_subset_fit(w, sf.subset_index, sf.sigma2, sf.fit.converged, sf.fit.iterations)
            logger.log_permutation(w, result.sigma2_w, result.failed_subsets)

    pooled = pool_permutations(results, separation_flags=frozenset(data.separated_clusters()))
    if logger is not None:
        logger.log_separation(list(pooled.separation_flags))
        logger.log_pooling(pooled.sigma2, pooled.permutations)
    return pooled, results


def pool_permutations(
    results: Sequence[PermutationResult],
    separation_flags: FrozenSet[int] = frozenset(),
) -> PooledEstimates:
    """
    β̂_j i σ̂² jako średnie po permutacjach (+ diagnostyka stabilności).
    """
    if not results:
        raise InvalidPartitionError("No permutation results to pool")
    clusters = sorted(results[0].beta_w)
    matrix = np.array([[r.beta_w[c] for c in clusters] for r in results])
    beta = {c: float(v) for c, v in zip(clusters, matrix.mean(axis=0))}
    sigma2 = float(np.mean([r.sigma2_w for r in results]))
    return PooledEstimates(
        beta=beta,
        sigma2=sigma2,
        permutations=len(results),
        separation_flags=frozenset(separation_flags),
        diagnostics=stability_diagnostics(results, matrix),
    )


def stability_diagnostics(results: Sequence[PermutationResult], beta_matrix: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """
    Diagnostyka „nietypowego zachowania” uśredniania.

    Per permutacja: σ̂²_w, min/max/std σ̂²_k, liczba niezbieżnych
    podzbiorów. Po permutacjach: rozrzut β̂_wj każdego klastra.
    """
    per_permutation = []
    for r in results:
        s2 = np.array([sf.sigma2 for sf in r.subset_fits])
        per_permutation.append({
            "permutation": r.index,
            "sigma2_w": r.sigma2_w,
            "subsets": len(s2),
            "sigma2_k_min": float(s2.min()),
            "sigma2_k_max": float(s2.max()),
            "sigma2_k_std": float(s2.std()),
            "failed_subsets": r.failed_subsets,
        })

    if beta_matrix is None:
        clusters = sorted(results[0].beta_w)
        beta_matrix = np.array([[r.beta_w[c] for c in clusters] for r in results])
    spread = beta_matrix.std(axis=0, ddof=1) if len(results) > 1 else np.zeros(beta_matrix.shape[1])

    return {
        "permutations": per_permutation,
        "failed_subsets_total": int(sum(p["failed_subsets"] for p in per_permutation)),
        "subsets_total": int(sum(p["subsets"] for p in per_permutation)),
        "sigma2_w_std": float(np.std([r.sigma2_w for r in results])),
        "beta_wj_std_max": float(spread.max()) if spread.size else 0.0,
        "beta_wj_std_median": float(np.median(spread)) if spread.size else 0.0,
    }


# ═══════════════════════════════════════════════════════════════════════════
# WERYFIKACJA NA PODZBIORZE
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class MLComparison:
    """
    Porównanie estymatorów procedury z pełną ML na wybranych klastrach.

    Attributes:
        rows (List[Dict]): cluster_id, beta_split, beta_ml, difference
        sigma2_split (float): σ̂² procedury
        sigma2_ml (float): σ̂² pełnej ML na podzbiorze
        converged (bool): Zbieżność pełnej ML
    """
    rows: List[Dict[str, Any]]
    sigma2_split: float
    sigma2_ml: float
    converged: bool

    @property
    def mean_abs_difference(self) -> float:
        return float(np.mean([abs(r["difference"]) for r in self.rows])) if self.rows else 0.0


def compare_with_full_ml(
    data: RatingsTable,
    pooled: PooledEstimates,
    cluster_ids: Sequence[int],
    options: Optional[FitOptions] = None,
) -> MLComparison:
    """
    Dopasowuje pełną ML na ocenach wybranych klastrów i porównuje β̂.

    Note:
        Na podzbiorze klastrów pełna wiarygodność jest wykonalna; różnice
        pokazują, jak daleko uśrednianie odchodzi od ML.
    """
    options = options or FitOptions()
    ids = sorted(int(c) for c in cluster_ids)
    fit = fit_ml(data.restrict(ids), options)
    rows = []
    for cid in ids:
        split_beta = pooled.beta[cid]
        ml_beta = fit.params.beta[cid]
        rows.append({
            "cluster_id": cid,
            "beta_split": split_beta,
            "beta_ml": ml_beta,
            "difference": split_beta - ml_beta,
            "separation_flag": cid in fit.separation_flags,
        })
    return MLComparison(rows=rows, sigma2_split=pooled.sigma2, sigma2_ml=fit.sigma2, converged=fit.converged)

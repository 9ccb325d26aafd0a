"""
Testy procedury podziału.

Testuje:
- S = 1 (jeden podzbiór) daje dokładnie pełną ML
- Determinizm przy różnych n_jobs i tym samym seedzie
- fit_permutation: β̂_wj dla każdego klastra, σ̂²_w ze zbieżnych podzbiorów
- Walidację podziałów (InvalidPartitionError)
- pool_permutations i diagnostykę
- compare_with_full_ml
"""

import numpy as np
import pytest

from src.core.errors import InvalidArgumentError, InvalidPartitionError
from src.core.rng import StreamRNG
from src.events.event_logger import EventLogger, EventType
from src.model.fitting import fit_ml
from src.splitproc.partition import Partition, PartitionSpec, make_partition
from src.splitproc.procedure import (
    compare_with_full_ml,
    fit_permutation,
    pool_permutations,
    run_procedure,
)


@pytest.fixture(scope="module")
def spec():
    return PartitionSpec(subset_size=5, permutations=3, mc_draws=500, seed=13)


@pytest.fixture(scope="module")
def procedure_run(small_data, spec):
    return run_procedure(small_data, spec)


# ═══════════════════════════════════════════════════════════════════════════
# TEST: S = 1
# ═══════════════════════════════════════════════════════════════════════════

def test_single_subset_equals_full_ml(small_data):
    fit = fit_ml(small_data)
    pooled, results = run_procedure(
        small_data, PartitionSpec(), partitions=[Partition.single(small_data.cluster_index)]
    )
    assert pooled.sigma2 == fit.sigma2
    for cid, beta in fit.params.beta.items():
        assert pooled.beta[cid] == beta
    assert results[0].subset_fits[0].fit.params == fit.params


# ═══════════════════════════════════════════════════════════════════════════
# TEST: DETERMINIZM
# ═══════════════════════════════════════════════════════════════════════════

def test_same_seed_same_estimates(small_data, spec, procedure_run):
    again, _ = run_procedure(small_data, spec)
    assert again.beta == procedure_run[0].beta
    assert again.sigma2 == procedure_run[0].sigma2


def test_parallel_equals_serial(small_data, spec, procedure_run):
    parallel, _ = run_procedure(small_data, spec, n_jobs=2)
    assert parallel.beta == procedure_run[0].beta
    assert parallel.sigma2 == procedure_run[0].sigma2


def test_different_seed_changes_partitions(small_data, spec, procedure_run):
    from dataclasses import replace
    _, other = run_procedure(small_data, replace(spec, seed=14))
    assert other[0].partition != procedure_run[1][0].partition


# ═══════════════════════════════════════════════════════════════════════════
# TEST: fit_permutation
# ═══════════════════════════════════════════════════════════════════════════

def test_fit_permutation_covers_clusters(small_data):
    partition = make_partition(small_data.cluster_index, 5, StreamRNG(3, 0))
    result = fit_permutation(small_data, partition)
    assert sorted(result.beta_w) == [int(c) for c in small_data.cluster_index]
    assert len(result.subset_fits) == partition.n_subsets
    converged = [sf.sigma2 for sf in result.subset_fits if sf.fit.converged]
    assert result.sigma2_w == pytest.approx(np.mean(converged))


def test_subset_fit_uses_only_own_clusters(small_data):
    partition = make_partition(small_data.cluster_index, 5, StreamRNG(3, 1))
    result = fit_permutation(small_data, partition)
    for sf in result.subset_fits:
        assert sorted(sf.fit.params.beta) == sorted(sf.cluster_ids)
    lookup = result.subset_for()
    assert all(cid in lookup[cid].cluster_ids for cid in result.beta_w)


def test_permutations_follow_stream_keys(small_data, spec, procedure_run):
    _, results = procedure_run
    for w, r in enumerate(results):
        expected = make_partition(small_data.cluster_index, spec.subset_size, StreamRNG(spec.seed, w))
        assert r.partition == expected
        assert r.index == w


# ═══════════════════════════════════════════════════════════════════════════
# TEST: WALIDACJA PODZIAŁU
# ═══════════════════════════════════════════════════════════════════════════

def test_partition_missing_cluster(small_data):
    ids = [int(c) for c in small_data.cluster_index]
    with pytest.raises(InvalidPartitionError):
        fit_permutation(small_data, Partition(subsets=(tuple(ids[1:]),)))


def test_partition_with_unrated_cluster(small_data):
    ids = [int(c) for c in small_data.cluster_index]
    with pytest.raises(InvalidPartitionError):
        fit_permutation(small_data, Partition(subsets=(tuple(ids), (10_000,))))


def test_partition_overlapping_subsets(small_data):
    ids = [int(c) for c in small_data.cluster_index]
    with pytest.raises(InvalidPartitionError):
        fit_permutation(small_data, Partition(subsets=(tuple(ids), (ids[0],))))


def test_subset_size_not_below_cluster_count(small_data):
    with pytest.raises(InvalidArgumentError):
        run_procedure(small_data, PartitionSpec(subset_size=small_data.n_clusters))


# ═══════════════════════════════════════════════════════════════════════════
# TEST: UŚREDNIANIE
# ═══════════════════════════════════════════════════════════════════════════

def test_pooled_is_plain_mean(procedure_run):
    pooled, results = procedure_run
    for cid, beta in pooled.beta.items():
        assert beta == pytest.approx(np.mean([r.beta_w[cid] for r in results]))
    assert pooled.sigma2 == pytest.approx(np.mean([r.sigma2_w for r in results]))
    assert pooled.permutations == len(results) == 3


def test_pool_empty_rejected():
    with pytest.raises(InvalidPartitionError):
        pool_permutations([])


def test_diagnostics(procedure_run):
    diagnostics = procedure_run[0].diagnostics
    assert len(diagnostics["permutations"]) == 3
    assert diagnostics["subsets_total"] == sum(p["subsets"] for p in diagnostics["permutations"])
    assert diagnostics["beta_wj_std_max"] >= diagnostics["beta_wj_std_median"] >= 0.0
    assert diagnostics["failed_subsets_total"] >= 0


def test_procedure_logs_events(small_data, spec):
    logger = EventLogger(seed=spec.seed)
    pooled, results = run_procedure(small_data, spec, logger=logger)
    n_subsets = sum(r.partition.n_subsets for r in results)
    assert len(logger.get_events_by_type(EventType.SUBSET_FITTED)) == n_subsets
    assert len(logger.get_events_by_type(EventType.PERMUTATION_DONE)) == 3
    pooling = logger.get_events_by_type(EventType.POOLING_DONE)
    assert pooling[0].data["sigma2"] == pooled.sigma2


# ═══════════════════════════════════════════════════════════════════════════
# TEST: PORÓWNANIE Z PEŁNĄ ML
# ═══════════════════════════════════════════════════════════════════════════

def test_compare_with_full_ml(small_data, procedure_run):
    pooled = procedure_run[0]
    ids = [int(c) for c in small_data.cluster_index[:6]]
    comparison = compare_with_full_ml(small_data, pooled, ids)
    assert [row["cluster_id"] for row in comparison.rows] == sorted(ids)
    for row in comparison.rows:
        assert row["difference"] == pytest.approx(row["beta_split"] - row["beta_ml"])
    assert comparison.mean_abs_difference >= 0.0
    assert comparison.sigma2_split == pooled.sigma2

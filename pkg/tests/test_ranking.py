"""
Testy oszacowań sukcesu i rankingu.

Testuje:
- rank_clusters: kolejność malejąca, remisy po cluster_id, rank_ci_lower
- estimate_success: P̂_j jako średnia po permutacjach, przedziały, separacja
"""

import numpy as np
import pytest

from src.core.rng import StreamRNG
from src.events.event_logger import EventLogger, EventType
from src.model.ratings import RatingsTable
from src.splitproc.partition import CIMode, PartitionSpec
from src.splitproc.probability import success_probability_from_draws
from src.splitproc.procedure import run_procedure
from src.splitproc.ranking import RankKey, SuccessEstimate, estimate_success, rank_clusters


# ═══════════════════════════════════════════════════════════════════════════
# TEST: rank_clusters
# ═══════════════════════════════════════════════════════════════════════════

def test_rank_descending_by_probability():
    estimates = [
        SuccessEstimate(1, 0.0, 0.3, 0.2, 0.4),
        SuccessEstimate(2, 0.0, 0.9, 0.1, 0.95),
        SuccessEstimate(3, 0.0, 0.6, 0.5, 0.7),
    ]
    ranked = rank_clusters(estimates)
    assert [e.cluster_id for e in ranked] == [2, 3, 1]
    assert [e.rank for e in ranked] == [1, 2, 3]


def test_rank_ties_broken_by_cluster_id():
    estimates = [SuccessEstimate(c, 0.0, 0.5, 0.4, 0.6) for c in (9, 4, 6)]
    assert [e.cluster_id for e in rank_clusters(estimates)] == [4, 6, 9]


def test_rank_by_lower_bound_sets_other_field():
    estimates = [
        SuccessEstimate(1, 0.0, 0.9, 0.1, 0.95),
        SuccessEstimate(2, 0.0, 0.6, 0.5, 0.7),
    ]
    ranked = rank_clusters(estimates, RankKey.CI_LOWER)
    assert [e.cluster_id for e in ranked] == [2, 1]
    assert [e.rank_ci_lower for e in ranked] == [1, 2]
    assert all(e.rank == 0 for e in ranked)


def test_rank_key_from_string():
    estimates = [SuccessEstimate(1, 0.0, 0.2, 0.3, 0.4), SuccessEstimate(2, 0.0, 0.8, 0.1, 0.9)]
    assert rank_clusters(estimates, "ci_lower")[0].cluster_id == 1


# ═══════════════════════════════════════════════════════════════════════════
# TEST: estimate_success
# ═══════════════════════════════════════════════════════════════════════════

@pytest.fixture(scope="module")
def spec():
    return PartitionSpec(subset_size=5, permutations=3, mc_draws=400, seed=5)


@pytest.fixture(scope="module")
def run(small_data, spec):
    pooled, results = run_procedure(small_data, spec)
    return pooled, results, estimate_success(small_data, pooled, results, spec)


def test_estimates_sorted_and_complete(small_data, run):
    estimates = run[2]
    assert sorted(e.cluster_id for e in estimates) == [int(c) for c in small_data.cluster_index]
    assert [e.rank for e in estimates] == list(range(1, len(estimates) + 1))
    probs = [e.prob_hat for e in estimates]
    assert probs == sorted(probs, reverse=True)
    assert sorted(e.rank_ci_lower for e in estimates) == list(range(1, len(estimates) + 1))


def test_probability_is_mean_over_permutations(spec, run):
    pooled, results, estimates = run
    est = estimates[0]
    cid = est.cluster_id
    expected = np.mean([
        success_probability_from_draws(
            r.beta_w[cid], r.sigma2_w, StreamRNG(spec.seed, r.index, cid).standard_normal(spec.mc_draws)
        )
        for r in results
    ])
    assert est.prob_hat == pytest.approx(expected, rel=1e-12)
    assert est.beta_hat == pooled.beta[cid]


def test_intervals_valid(small_data, run):
    observed = small_data.observed_probability()
    for est in run[2]:
        assert 0.0 <= est.ci_lower <= est.ci_upper <= 1.0
        assert est.prob_observed == observed[est.cluster_id]


def test_union_contains_average(small_data, spec, run):
    from dataclasses import replace
    pooled, results, average = run
    union = estimate_success(small_data, pooled, results, replace(spec, ci_mode=CIMode.UNION))
    by_id = {e.cluster_id: e for e in union}
    for est in average:
        wide = by_id[est.cluster_id]
        assert wide.ci_lower <= est.ci_lower and est.ci_upper <= wide.ci_upper
        assert wide.prob_hat == est.prob_hat


def test_deterministic_across_jobs(small_data, spec, run):
    pooled, results, serial = run
    assert estimate_success(small_data, pooled, results, spec, n_jobs=2) == serial


# ═══════════════════════════════════════════════════════════════════════════
# TEST: SEPARACJA
# ═══════════════════════════════════════════════════════════════════════════

@pytest.fixture(scope="module")
def separated_data():
    """Klaster 1: same jedynki, klaster 2: same zera, reszta mieszana."""
    rng = StreamRNG(31)
    entries = []
    for e in range(30):
        entries += [(e, 1, 1), (e, 2, 0)]
        for c in range(3, 9):
            entries.append((e, c, int(rng.generator.random() < 0.4)))
    return RatingsTable.from_entries(entries)


def test_separated_clusters_get_point_intervals(separated_data):
    spec = PartitionSpec(subset_size=3, permutations=2, mc_draws=200, seed=2)
    pooled, results = run_procedure(separated_data, spec)
    logger = EventLogger(seed=2)
    estimates = {e.cluster_id: e for e in estimate_success(separated_data, pooled, results, spec, logger=logger)}

    top, bottom = estimates[1], estimates[2]
    assert top.flagged_separation and bottom.flagged_separation
    assert (top.ci_lower, top.ci_upper) == (1.0, 1.0)
    assert (bottom.ci_lower, bottom.ci_upper) == (0.0, 0.0)
    assert top.prob_hat > 0.5 > bottom.prob_hat
    assert not estimates[3].flagged_separation
    assert 1 in pooled.separation_flags

    subjects = {e.subject for e in logger.get_events_by_type(EventType.DEGENERATE_INTERVAL)}
    assert {"cluster 1", "cluster 2"} <= subjects

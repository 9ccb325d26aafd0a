"""
Wspólna konfiguracja pytest.

- katalog repozytorium w sys.path (import `src.*`)
- znacznik `slow` + flaga --runslow dla długich testów statystycznych
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="Uruchom testy oznaczone jako slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: długi test statystyczny (wymaga --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="wymaga --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# ═══════════════════════════════════════════════════════════════════════════
# WSPÓLNE DANE
# ═══════════════════════════════════════════════════════════════════════════

@pytest.fixture(scope="session")
def small_sim_config():
    """Małe badanie: 20 klastrów, 40 ekspertów, ~8 ocen na eksperta."""
    from src.simstudy.config import SimConfig
    from src.splitproc.partition import PartitionSpec
    return SimConfig(
        n_clusters=20, n_experts=40, beta_mean=-1.0, beta_var=1.0, sigma2_true=4.0,
        ratings_mean=8.0, ratings_min=4, ratings_max=12, replications=2,
        split_spec=PartitionSpec(subset_size=5, permutations=3, mc_draws=500),
        master_seed=77,
    )


@pytest.fixture(scope="session")
def small_data(small_sim_config):
    from src.simstudy.generator import draw_true_betas, generate_dataset
    return generate_dataset(small_sim_config, draw_true_betas(small_sim_config), 0)

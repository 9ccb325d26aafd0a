"""
Testy API (FastAPI TestClient).
"""

import pytest
from fastapi.testclient import TestClient

from api.main import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def ratings(small_data):
    return [{"expert_id": e, "cluster_id": c, "rating": r} for e, c, r in small_data.entries]


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json() == {"status": "healthy"}


# ═══════════════════════════════════════════════════════════════════════════
# TEST: /api/probability
# ═══════════════════════════════════════════════════════════════════════════

def test_probability_anchor(client):
    response = client.post("/api/probability", json={"beta": 3.07, "sigma2": 10.279})
    assert response.status_code == 200
    body = response.json()
    assert 0.78 <= body["prob_mc"] <= 0.82
    assert body["prob_quadrature"] == pytest.approx(0.80, abs=0.01)
    assert body["mc_standard_error"] > 0


def test_probability_same_seed_same_value(client):
    payload = {"beta": -1.0, "sigma2": 4.0, "mc_draws": 500, "seed": 3}
    first = client.post("/api/probability", json=payload).json()
    assert client.post("/api/probability", json=payload).json() == first


def test_probability_negative_variance(client):
    assert client.post("/api/probability", json={"beta": 0.0, "sigma2": -1.0}).status_code == 422


# ═══════════════════════════════════════════════════════════════════════════
# TEST: /api/analyze
# ═══════════════════════════════════════════════════════════════════════════

def test_analyze(client, ratings, small_data):
    payload = {"ratings": ratings, "subset_size": 5, "permutations": 2, "mc_draws": 200, "seed": 4}
    response = client.post("/api/analyze", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert len(body["sigma2_w"]) == 2
    assert len(body["estimates"]) == small_data.n_clusters
    assert [e["rank"] for e in body["estimates"]] == list(range(1, small_data.n_clusters + 1))
    assert set(body["estimates"][0]) == {
        "cluster_id", "beta_hat", "prob_estimated", "prob_observed",
        "ci_lower", "ci_upper", "rank", "rank_ci_lower", "separation_flag",
    }


def test_analyze_subset_size_too_large(client, ratings):
    payload = {"ratings": ratings, "subset_size": 500, "permutations": 1, "mc_draws": 10}
    assert client.post("/api/analyze", json=payload).status_code == 400


def test_analyze_bad_rating(client):
    payload = {"ratings": [{"expert_id": 1, "cluster_id": 1, "rating": 2}], "subset_size": 2}
    assert client.post("/api/analyze", json=payload).status_code == 400


def test_analyze_unknown_field(client, ratings):
    assert client.post("/api/analyze", json={"ratings": ratings, "nk": 5}).status_code == 422

"""
Testy podkomend CLI (main.main).

Testuje:
- analyze: pliki wynikowe, kolumny rankingu, P obserwowane, powtarzalność
- analyze: id_map.json z ziarnem i ustawieniami, wagi z pliku towarzyszącego
- analyze: analiza ważona, wrażliwość na N_k, porównanie z pełną ML
- simulate: pliki raportu
- Kody wyjścia: 0 sukces, 1 błąd danych, 2 niepoprawne ustawienia
"""

import json

import pandas as pd
import pytest

from main import build_parser, main
from src.ingest.loader import write_ratings
from src.ingest.weights import compute_weights

RANKING_COLUMNS = [
    "cluster_id", "beta_hat", "prob_estimated", "prob_observed",
    "ci_lower", "ci_upper", "rank", "rank_ci_lower", "separation_flag",
]
FAST = ["--nk", "5", "--permutations", "2", "--mc-draws", "200", "--threads", "1"]


@pytest.fixture
def ratings_csv(tmp_path, small_data):
    return str(write_ratings(small_data, str(tmp_path / "ratings.csv")))


def analyze(ratings_csv, out, *extra):
    return main(["analyze", ratings_csv, *FAST, "--seed", "7", "--output-dir", str(out), *extra])


# ═══════════════════════════════════════════════════════════════════════════
# TEST: ANALYZE
# ═══════════════════════════════════════════════════════════════════════════

def test_analyze_writes_outputs(tmp_path, ratings_csv):
    out = tmp_path / "out"
    assert analyze(ratings_csv, out) == 0
    for name in ("ranking.csv", "histogram.csv", "summary.json", "id_map.json"):
        assert (out / name).is_file()

    lines = (out / "ranking.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# seed=7"
    ranking = pd.read_csv(out / "ranking.csv", comment="#")
    assert list(ranking.columns) == RANKING_COLUMNS
    assert list(ranking["rank"]) == list(range(1, len(ranking) + 1))
    assert ranking["prob_estimated"].is_monotonic_decreasing

    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["seed"] == 7
    assert summary["settings"]["subset_size"] == 5
    assert summary["unweighted"]["sigma2"] > 0

    id_map = json.loads((out / "id_map.json").read_text(encoding="utf-8"))
    assert id_map["seed"] == 7
    assert id_map["settings"] == summary["settings"]
    # tabela z generatora nie ma etykiet
    assert id_map["id_map"] is None


def test_observed_probability_is_mean_rating(tmp_path, ratings_csv):
    out = tmp_path / "out"
    analyze(ratings_csv, out)
    ranking = pd.read_csv(out / "ranking.csv", comment="#").set_index("cluster_id")
    raw = pd.read_csv(ratings_csv)
    means = raw.groupby("cluster_id")["rating"].mean()
    for cid, mean in means.items():
        assert ranking.loc[cid, "prob_observed"] == pytest.approx(mean, abs=1e-9)


def test_rerun_byte_identical(tmp_path, ratings_csv):
    out = tmp_path / "out"
    analyze(ratings_csv, out)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    analyze(ratings_csv, out)
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second


def test_analyze_options(tmp_path, ratings_csv):
    out = tmp_path / "out"
    code = analyze(ratings_csv, out, "--weighted", "--sensitivity-nk", "4", "--ml-check-clusters", "5")
    assert code == 0
    ranking = pd.read_csv(out / "ranking.csv", comment="#")
    assert {"prob_weighted", "rank_weighted"} <= set(ranking.columns)
    sensitivity = pd.read_csv(out / "sensitivity.csv", comment="#")
    assert len(sensitivity) == len(ranking)
    ml_check = pd.read_csv(out / "ml_check.csv", comment="#")
    assert len(ml_check) == 5
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert {"weighted", "sensitivity", "ml_check"} <= set(summary)


def test_stored_weights_only_in_weighted_pass(tmp_path, small_data):
    plain = write_ratings(small_data, str(tmp_path / "plain" / "ratings.csv"))
    weighted = write_ratings(small_data.with_weights(compute_weights(small_data)),
                             str(tmp_path / "weighted" / "ratings.csv"))
    summaries = []
    for csv in (plain, weighted):
        out = csv.parent / "out"
        assert analyze(str(csv), out, "--weighted") == 0
        summaries.append(json.loads((out / "summary.json").read_text(encoding="utf-8")))
    for part in ("unweighted", "weighted"):
        for key in ("sigma2", "sigma2_w"):
            assert summaries[0][part][key] == summaries[1][part][key]
    assert summaries[0]["unweighted"]["sigma2"] != summaries[0]["weighted"]["sigma2"]


def test_config_file_is_applied(tmp_path, ratings_csv):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"ci_mode": "union", "histogram_bins": 5}), encoding="utf-8")
    out = tmp_path / "out"
    assert analyze(ratings_csv, out, "--config", str(config)) == 0
    histogram = pd.read_csv(out / "histogram.csv", comment="#")
    assert len(histogram) == 5
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["settings"]["ci_mode"] == "union"


# ═══════════════════════════════════════════════════════════════════════════
# TEST: SIMULATE
# ═══════════════════════════════════════════════════════════════════════════

def test_simulate_writes_report(tmp_path):
    config = tmp_path / "sim.json"
    config.write_text(json.dumps({"ratings_mean": 4.0, "ratings_min": 2, "ratings_max": 6}), encoding="utf-8")
    out = tmp_path / "sim"
    code = main([
        "simulate", "--config", str(config), "--clusters", "10", "--experts", "25",
        "--replications", "1", "--nk", "3", "--permutations", "2", "--mc-draws", "100",
        "--threads", "1", "--seed", "5", "--output-dir", str(out),
    ])
    assert code == 0
    for name in ("sim_estimates.csv", "sim_probabilities.csv", "sim_relative_differences.csv", "sim_summary.json"):
        assert (out / name).is_file()
    summary = json.loads((out / "sim_summary.json").read_text(encoding="utf-8"))
    assert summary["seed"] == 5
    assert summary["summary"]["replications"] == 1


# ═══════════════════════════════════════════════════════════════════════════
# TEST: KODY WYJŚCIA
# ═══════════════════════════════════════════════════════════════════════════

def test_zero_replications_is_usage_error(tmp_path):
    assert main(["simulate", "--replications", "0", "--output-dir", str(tmp_path)]) == 2


def test_subset_size_too_small_is_usage_error(tmp_path, ratings_csv):
    assert main(["analyze", ratings_csv, "--nk", "1", "--output-dir", str(tmp_path)]) == 2


def test_subset_size_not_below_clusters_is_error(tmp_path, ratings_csv, small_data):
    nk = str(small_data.n_clusters)
    assert main(["analyze", ratings_csv, "--nk", nk, "--threads", "1", "--output-dir", str(tmp_path)]) == 1


def test_missing_input_file(tmp_path):
    assert main(["analyze", str(tmp_path / "missing.csv"), "--output-dir", str(tmp_path)]) == 1


def test_invalid_rating_value(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("expert_id,cluster_id,rating\n1,1,1\n1,2,3\n", encoding="utf-8")
    assert main(["analyze", str(path), "--output-dir", str(tmp_path / "out")]) == 1
    assert "line 3" in capsys.readouterr().err


def test_adaptive_flag_pair():
    assert build_parser().parse_args(["analyze", "r.csv"]).adaptive is None
    assert build_parser().parse_args(["analyze", "r.csv", "--no-adaptive"]).adaptive is False
    assert build_parser().parse_args(["analyze", "r.csv", "--adaptive"]).adaptive is True


def test_unknown_flag_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["analyze", "r.csv", "--bogus"])
    assert exc.value.code == 2

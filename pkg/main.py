#!/usr/bin/env python3
"""
Split-Sample Ratings Analysis - Entry Point
═══════════════════════════════════════════════════════════════════════════

Ranking klastrów po prawdopodobieństwie sukcesu z ocen ekspertów
(model logistyczny z losowym efektem eksperta, procedura podziału).

Użycie:
    python main.py analyze ratings.csv                       # Domyślne N_k=30, W=20
    python main.py analyze ratings.csv --nk 15 --seed 7      # Inne ustawienia
    python main.py analyze ratings.csv --weighted            # + analiza ważona
    python main.py simulate --replications 50 --seed 7       # Badanie symulacyjne
    python main.py selfcheck                                 # Wyrocznie numeryczne

Ustawienia:  data/defaults.yaml  <  --config plik (JSON/YAML)  <  flagi

Kody wyjścia:
    0 - sukces (także przy częściowym braku zbieżności - ostrzeżenia)
    1 - błąd danych / konfiguracji / pliku
    2 - niepoprawne argumenty
"""

import argparse
import sys
from pathlib import Path

# Dodaj src do path
sys.path.insert(0, str(Path(__file__).parent))

from pydantic import ValidationError

from src.cli.config import RunConfig, SimulateRunConfig
from src.cli.analyze import run_analyze
from src.cli.selfcheck import run_selfcheck
from src.cli.simulate import run_simulate
from src.core.errors import SplitProcedureError


def _add_common(parser: argparse.ArgumentParser) -> None:
    """Flagi wspólne dla analyze i simulate (None = nie nadpisuj)."""
    parser.add_argument("--config", help="Plik ustawień (płaski JSON albo YAML)")
    parser.add_argument("--nk", dest="subset_size", type=int, help="N_k - klastrów w podzbiorze")
    parser.add_argument("--permutations", type=int, help="W - liczba permutacji")
    parser.add_argument("--mc-draws", dest="mc_draws", type=int, help="Q - losowania Monte Carlo")
    parser.add_argument("--quadrature-order", dest="quadrature_order", type=int,
                        help="Rząd kwadratury Gaussa-Hermite'a")
    parser.add_argument("--adaptive", action=argparse.BooleanOptionalAction, default=None,
                        help="Adaptacyjna kwadratura, węzły na modzie (domyślnie włączona)")
    parser.add_argument("--ci-mode", dest="ci_mode", choices=["average", "union", "intersection"],
                        help="Łączenie przedziałów z permutacji")
    parser.add_argument("--ci-level", dest="ci_level", type=float, help="Poziom ufności")
    parser.add_argument("--bonferroni", action="store_true", default=None,
                        help="Poziom 1 - α/W w każdej permutacji")
    parser.add_argument("--threads", type=int, help="Liczba procesów (0 = wszystkie rdzenie)")
    parser.add_argument("--output-dir", dest="output_dir", help="Katalog wyników")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Split-sample analysis of binary expert ratings",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Ranking klastrów z pliku ocen")
    analyze.add_argument("input_path", help="CSV z kolumnami expert_id, cluster_id, rating")
    _add_common(analyze)
    analyze.add_argument("--seed", type=int, help="Ziarno główne")
    analyze.add_argument("--weighted", action="store_true", default=None,
                         help="Dodaj analizę ważoną (wagi N / liczba ocen eksperta)")
    analyze.add_argument("--weights", dest="weights_path", help="CSV wag (expert_id, weight)")
    analyze.add_argument("--sensitivity-nk", dest="sensitivity_nk", type=int,
                         help="Porównaj z drugim rozmiarem podzbioru")
    analyze.add_argument("--ml-check-clusters", dest="ml_check_clusters", type=int,
                         help="Porównaj z pełną ML na K losowych klastrach")
    analyze.add_argument("--delimiter", help="Separator pól CSV")

    simulate = sub.add_parser("simulate", help="Badanie symulacyjne: split vs pełna ML")
    _add_common(simulate)
    simulate.add_argument("--seed", dest="master_seed", type=int, help="Ziarno całego badania")
    simulate.add_argument("--replications", type=int, help="Liczba replikacji")
    simulate.add_argument("--clusters", dest="n_clusters", type=int, help="N - liczba klastrów")
    simulate.add_argument("--experts", dest="n_experts", type=int, help="n - liczba ekspertów")
    simulate.add_argument("--sigma2", dest="sigma2_true", type=float, help="Prawdziwe σ²")

    sub.add_parser("selfcheck", help="Szybkie testy numeryczne")
    return parser


def main(argv=None) -> int:
    """Główna funkcja."""
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}

    try:
        if args.command == "analyze":
            return run_analyze(RunConfig.from_sources(args.config, overrides))
        if args.command == "simulate":
            return run_simulate(SimulateRunConfig.from_sources(args.config, overrides))
        code, _ = run_selfcheck()
        return code
    except ValidationError as e:
        print(f"error: invalid settings\n{e}", file=sys.stderr)
        return 2
    except (SplitProcedureError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

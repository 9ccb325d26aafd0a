"""
Zapis plików wynikowych (CSV + JSON).

Każdy plik jest samoopisujący: CSV zaczyna się od linii komentarza
z ziarnem i pełną efektywną konfiguracją,

    # seed=1
    # config={"subset_size": 30, "permutations": 20, ...}
    cluster_id,beta_hat,...

a JSON zawiera te same pola w kluczach "seed" i "settings".
Brak znaczników czasu - ten sam bieg daje bajt w bajt te same pliki
(pandas.read_csv(path, comment="#") wczytuje dane z powrotem).
"""

from __future__ import annotations
from pathlib import Path
from typing import Any, Dict
import json

import pandas as pd

from ..events.event_logger import to_plain


def write_csv(
    frame: pd.DataFrame,
    path: Path,
    seed: int,
    settings: Dict[str, Any],
    float_format: str = "%.10g",
) -> Path:
    """Zapisuje DataFrame z nagłówkiem komentarza (seed, config)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# seed={seed}\n")
        f.write(f"# config={json.dumps(to_plain(settings), sort_keys=True)}\n")
        frame.to_csv(f, index=False, float_format=float_format, lineterminator="\n")
    return path


def write_json(payload: Dict[str, Any], path: Path) -> Path:
    """Zapisuje słownik jako JSON (wcięcie 2, stała kolejność kluczy)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_plain(payload), f, indent=2, ensure_ascii=False, sort_keys=True, allow_nan=True)
        f.write("\n")
    return path

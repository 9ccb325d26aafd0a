"""
Wczytywanie ocen z plików CSV.

FORMAT WEJŚCIA:
═══════════════════════════════════════════════════════════════════

    expert_id,cluster_id,rating        <- linia 1 (nagłówek)
    anna,295061,1                      <- linia 2
    anna,84163,0
    bartek,295061,1

    • separator i nazwy kolumn są konfigurowalne (FormatOptions)
    • identyfikatory to dowolne tokeny; dostają gęste indeksy 0..k-1
      w kolejności posortowanych etykiet (liczbowo, jeśli wszystkie
      są liczbami całkowitymi, inaczej leksykograficznie)
    • ocena musi być dokładnie tokenem 0 albo 1 - "1.0", "1e0" itp.
      są odrzucane
    • numery linii w błędach to numery linii pliku (nagłówek = 1)

Opcjonalny plik wag:   expert_id,weight
Mapa identyfikatorów:  id_map.json  {"seed": ..., "settings": {...},
                                     "id_map": {"experts": {"0": "anna", ...}, ...}}

PLIK TOWARZYSZĄCY (ratings.table.json):
═══════════════════════════════════════════════════════════════════

    write_ratings() zapisuje obok CSV etykiety -> gęste id, wagi ω_i
    i id_map. load_ratings() odtwarza z niego tabelę dokładnie
    (te same id, wagi, id_map). Bez pliku towarzyszącego id są
    nadawane jak wyżej, a tabela nie ma wag.
"""

from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional
import json
import re

import numpy as np
import pandas as pd

from ..core.errors import InvalidArgumentError, RatingsParseError, RatingsValidationError
from ..core.output import write_json
from ..model.ratings import IdMap, RatingsTable

# Pierwsza linia danych w pliku (po nagłówku)
FIRST_DATA_LINE = 2

# Jedyne dopuszczalne tokeny oceny
RATING_TOKENS = ("0", "1")

SIDECAR_SUFFIX = ".table.json"


@dataclass(frozen=True)
class FormatOptions:
    """
    Ustawienia formatu CSV.

    Attributes:
        delimiter (str): Separator pól
        expert_column (str): Kolumna eksperta
        cluster_column (str): Kolumna klastra
        rating_column (str): Kolumna oceny
    """
    delimiter: str = ","
    expert_column: str = "expert_id"
    cluster_column: str = "cluster_id"
    rating_column: str = "rating"

    @property
    def columns(self) -> List[str]:
        return [self.expert_column, self.cluster_column, self.rating_column]


def _read_frame(path: Path, delimiter: str, required: List[str]) -> pd.DataFrame:
    """Czyta CSV jako tekst; błędy pandas zamienia na błędy domenowe."""
    if not path.is_file():
        raise InvalidArgumentError(f"File not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as e:
        raise InvalidArgumentError(f"{path} is empty") from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise RatingsParseError(f"{path}: malformed row: {e}", line=line) from e

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise RatingsParseError(f"{path}: header lacks column(s) {missing}", line=1)

    frame = frame[required].fillna("").apply(lambda col: col.str.strip())
    frame["line"] = np.arange(len(frame)) + FIRST_DATA_LINE
    # puste linie nie przesuwają numeracji, ale nie są danymi
    blank = (frame[required] == "").all(axis=1)
    frame = frame[~blank]

    partial = (frame[required] == "").any(axis=1)
    if partial.any():
        line = int(frame.loc[partial, "line"].iloc[0])
        raise RatingsParseError(f"{path}: missing value on line {line}", line=line)
    if frame.empty:
        raise InvalidArgumentError(f"{path} has no data rows")
    return frame


def _dense_labels(tokens: pd.Series) -> List[str]:
    """Unikalne etykiety w kolejności gęstych indeksów."""
    labels = sorted(set(tokens))
    if all(re.fullmatch(r"[+-]?\d+", t) for t in labels):
        labels.sort(key=int)
    return labels


def table_sidecar(path: str) -> Path:
    """Ścieżka pliku towarzyszącego dla CSV ocen (ratings.csv -> ratings.table.json)."""
    return Path(path).with_suffix(SIDECAR_SUFFIX)


def _ids_from_sidecar(
    frame: pd.DataFrame, column: str, lookup: Dict[str, Any], path: Path,
) -> np.ndarray:
    """Tłumaczy etykiety na id zapisane w pliku towarzyszącym."""
    ids = frame[column].map({str(k): int(v) for k, v in lookup.items()})
    unknown = ids.isna()
    if unknown.any():
        lines = [int(v) for v in frame.loc[unknown, "line"]]
        raise RatingsValidationError(
            f"{path}: label {frame.loc[unknown, column].iloc[0]!r} on line {lines[0]} "
            f"is missing from {table_sidecar(path).name}",
            lines=lines,
        )
    return ids.to_numpy(dtype=np.int64)


def load_ratings(path: str, options: Optional[FormatOptions] = None) -> RatingsTable:
    """
    Wczytuje i waliduje plik ocen.

    Jeśli obok pliku leży ratings.table.json (z write_ratings()), id,
    wagi i id_map są brane z niego.

    Args:
        path: Ścieżka do CSV
        options: Format (None = domyślny)

    Returns:
        RatingsTable z id_map (etykiety oryginalne)

    Raises:
        InvalidArgumentError: Brak pliku albo plik pusty
        RatingsParseError: Wadliwy wiersz albo ocena nie jest liczbą (z numerem linii)
        RatingsValidationError: Ocena inna niż token 0/1, zduplikowana para
            albo etykieta nieobecna w pliku towarzyszącym

    Example:
        >>> table = load_ratings("ratings.csv")
        >>> table.id_map.cluster_label(0)
        '295061'
    """
    options = options or FormatOptions()
    path = Path(path)
    frame = _read_frame(path, options.delimiter, options.columns)
    e_col, c_col, r_col = options.columns

    values = frame[r_col]
    invalid = ~values.isin(RATING_TOKENS)
    if invalid.any():
        lines = [int(v) for v in frame.loc[invalid, "line"]]
        token = values[invalid].iloc[0]
        if pd.isna(pd.to_numeric(token, errors="coerce")):
            raise RatingsParseError(
                f"{path}: rating {token!r} on line {lines[0]} is not a number", line=lines[0]
            )
        raise RatingsValidationError(
            f"{path}: rating must be 0 or 1, got {token!r} on line {lines[0]}", lines=lines
        )

    dup = frame.duplicated([e_col, c_col], keep=False)
    if dup.any():
        lines = [int(v) for v in frame.loc[dup, "line"]]
        raise RatingsValidationError(
            f"{path}: duplicate (expert, cluster) pairs on lines {lines[:10]}", lines=lines
        )

    ratings = values.astype(int).to_numpy(dtype=np.int8)
    sidecar = table_sidecar(path)
    if sidecar.is_file():
        with open(sidecar, "r", encoding="utf-8") as f:
            stored = json.load(f)
        weights = stored.get("weights")
        return RatingsTable.from_arrays(
            _ids_from_sidecar(frame, e_col, stored["experts"], path),
            _ids_from_sidecar(frame, c_col, stored["clusters"], path),
            ratings,
            weights={int(k): float(w) for k, w in weights.items()} if weights is not None else None,
            id_map=IdMap.from_dict(stored["id_map"]) if stored.get("id_map") is not None else None,
        )

    expert_labels = _dense_labels(frame[e_col])
    cluster_labels = _dense_labels(frame[c_col])
    expert_ids = frame[e_col].map({label: i for i, label in enumerate(expert_labels)})
    cluster_ids = frame[c_col].map({label: i for i, label in enumerate(cluster_labels)})

    return RatingsTable.from_arrays(
        expert_ids.to_numpy(dtype=np.int64),
        cluster_ids.to_numpy(dtype=np.int64),
        ratings,
        id_map=IdMap(experts=expert_labels, clusters=cluster_labels),
    )


def write_ratings(table: RatingsTable, path: str, options: Optional[FormatOptions] = None) -> Path:
    """
    Zapisuje tabelę do CSV (etykiety z id_map, jeśli jest) i plik towarzyszący.

    load_ratings() na zapisanym pliku daje tabelę równą wejściowej:
    te same id, wagi i id_map.
    """
    options = options or FormatOptions()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    expert_label = table.id_map.expert_label if table.id_map is not None else str
    cluster_label = table.id_map.cluster_label if table.id_map is not None else str
    frame = pd.DataFrame({
        options.expert_column: [expert_label(int(e)) for e in table.experts],
        options.cluster_column: [cluster_label(int(c)) for c in table.clusters],
        options.rating_column: table.ratings.astype(int),
    })
    frame.to_csv(path, sep=options.delimiter, index=False, lineterminator="\n")

    write_json({
        "experts": {expert_label(int(e)): int(e) for e in table.expert_index},
        "clusters": {cluster_label(int(c)): int(c) for c in table.cluster_index},
        "weights": table.weights,
        "id_map": table.id_map.to_dict() if table.id_map is not None else None,
    }, table_sidecar(path))
    return path


def load_weights(path: str, table: RatingsTable, delimiter: str = ",") -> Dict[int, float]:
    """
    Wczytuje wagi ekspertów (kolumny expert_id, weight).

    Etykiety są tłumaczone na gęste identyfikatory przez table.id_map.

    Raises:
        RatingsParseError: Wadliwy wiersz albo waga nie jest liczbą
        InvalidArgumentError: Ekspert nieobecny w tabeli
    """
    path = Path(path)
    frame = _read_frame(path, delimiter, ["expert_id", "weight"])
    weights = pd.to_numeric(frame["weight"], errors="coerce")
    if weights.isna().any():
        line = int(frame.loc[weights.isna(), "line"].iloc[0])
        raise RatingsParseError(f"{path}: weight on line {line} is not a number", line=line)

    if table.id_map is not None:
        lookup = {label: i for i, label in enumerate(table.id_map.experts)}
    else:
        lookup = {str(int(e)): int(e) for e in table.expert_index}
    result: Dict[int, float] = {}
    for label, weight, line in zip(frame["expert_id"], weights, frame["line"]):
        if label not in lookup:
            raise InvalidArgumentError(f"{path}: unknown expert {label!r} on line {line}")
        result[lookup[label]] = float(weight)
    return result


def save_id_map(
    id_map: Optional[IdMap],
    path: str,
    seed: Optional[int] = None,
    settings: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Zapisuje mapę identyfikatorów razem z ziarnem i ustawieniami przebiegu.

    Format: {"seed": ..., "settings": {...}, "id_map": {...} | null}
    """
    payload = {
        "seed": seed,
        "settings": settings,
        "id_map": id_map.to_dict() if id_map is not None else None,
    }
    return write_json(payload, Path(path))


def load_id_map(path: str) -> Optional[IdMap]:
    """Wczytuje mapę zapisaną przez save_id_map() (None, gdy tabela jej nie miała)."""
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("id_map") is None:
        return None
    return IdMap.from_dict(payload["id_map"])

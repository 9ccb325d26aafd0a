"""
RatingsTable - rzadka tabela binarnych ocen (ekspert, klaster).

Ekspert i ocenia tylko podzbiór klastrów Λ_i, więc tabela przechowuje
wyłącznie faktycznie wystawione oceny:

    ekspert   klaster   ocena
    ─────────────────────────
       1        295061     1
       1         84163     0
       2        295061     1
      ...

REPREZENTACJA:
═══════════════════════════════════════════════════════════════════

    Wpisy są trzymane w KANONICZNEJ kolejności (ekspert, klaster) jako
    tablice numpy. Dzięki temu:
    • kolejność wpisów na wejściu nie ma wpływu na wyniki
    • oceny jednego eksperta tworzą ciągły segment (np.add.reduceat)

    cluster_index / expert_index - posortowane, unikalne identyfikatory
    cluster_pos / expert_pos     - pozycja każdego wpisu w tych indeksach
    expert_starts                - początki segmentów ekspertów

INWARIANTY:
═══════════════════════════════════════════════════════════════════

    • każda ocena to 0 lub 1 (inne wartości są odrzucane, nie rzutowane)
    • brak zduplikowanych par (ekspert, klaster)
    • każdy ekspert i klaster z indeksu ma ≥ 1 ocenę (z konstrukcji)
    • jeśli są wagi ω_i, każdy ekspert ma wagę skończoną i > 0

Przykład:
    >>> table = RatingsTable.from_entries([(1, 10, 1), (1, 11, 0), (2, 10, 1)])
    >>> table.n_experts, table.n_clusters
    (2, 2)
    >>> table.observed_probability()
    {10: 1.0, 11: 0.0}
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import InvalidArgumentError, RatingsValidationError


@dataclass
class IdMap:
    """
    Mapa gęstych identyfikatorów całkowitych na oryginalne etykiety.

    Gęsty identyfikator k odpowiada etykiecie experts[k] / clusters[k].

    Attributes:
        experts (List[str]): Etykiety ekspertów
        clusters (List[str]): Etykiety klastrów
    """
    experts: List[str] = field(default_factory=list)
    clusters: List[str] = field(default_factory=list)

    def expert_label(self, expert_id: int) -> str:
        return self.experts[expert_id]

    def cluster_label(self, cluster_id: int) -> str:
        return self.clusters[cluster_id]

    def to_dict(self) -> Dict[str, Any]:
        """Serializuje mapę (format pliku id_map.json)."""
        return {
            "experts": {str(i): label for i, label in enumerate(self.experts)},
            "clusters": {str(i): label for i, label in enumerate(self.clusters)},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IdMap":
        """Odtwarza mapę z to_dict()."""
        experts = data.get("experts", {})
        clusters = data.get("clusters", {})
        return cls(
            experts=[experts[k] for k in sorted(experts, key=int)],
            clusters=[clusters[k] for k in sorted(clusters, key=int)],
        )


@dataclass(frozen=True, eq=False)
class RatingsTable:
    """
    Niezmienna tabela ocen w kanonicznej kolejności (ekspert, klaster).

    Nie twórz bezpośrednio - użyj RatingsTable.from_entries(), które
    waliduje inwarianty i sortuje wpisy.

    Attributes:
        experts (np.ndarray): Id eksperta każdego wpisu
        clusters (np.ndarray): Id klastra każdego wpisu
        ratings (np.ndarray): Ocena 0/1 każdego wpisu (int8)
        weights (Optional[Dict[int, float]]): Wagi częstości ω_i
        id_map (Optional[IdMap]): Oryginalne etykiety (z ingestu)
    """
    experts: np.ndarray
    clusters: np.ndarray
    ratings: np.ndarray
    weights: Optional[Dict[int, float]] = None
    id_map: Optional[IdMap] = None

    # Pola pochodne (wyliczane w __post_init__)
    expert_index: np.ndarray = field(init=False, repr=False)
    cluster_index: np.ndarray = field(init=False, repr=False)
    expert_pos: np.ndarray = field(init=False, repr=False)
    cluster_pos: np.ndarray = field(init=False, repr=False)
    expert_starts: np.ndarray = field(init=False, repr=False)
    weight_vector: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        expert_index, expert_pos = np.unique(self.experts, return_inverse=True)
        cluster_index, cluster_pos = np.unique(self.clusters, return_inverse=True)
        starts = np.flatnonzero(np.r_[True, np.diff(expert_pos) != 0]) if len(expert_pos) else np.zeros(0, dtype=np.int64)

        if self.weights is None:
            weight_vector = np.ones(len(expert_index))
        else:
            weight_vector = np.array([self.weights[int(e)] for e in expert_index], dtype=float)

        for name, value in (
            ("expert_index", expert_index),
            ("cluster_index", cluster_index),
            ("expert_pos", expert_pos.astype(np.int64)),
            ("cluster_pos", cluster_pos.astype(np.int64)),
            ("expert_starts", starts.astype(np.int64)),
            ("weight_vector", weight_vector),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    # ─────────────────────────────────────────────────────────────────────────
    # KONSTRUKCJA
    # ─────────────────────────────────────────────────────────────────────────

    @classmethod
    def from_entries(
        cls,
        entries: Iterable[Tuple[int, int, int]],
        weights: Optional[Dict[int, float]] = None,
        id_map: Optional[IdMap] = None,
    ) -> "RatingsTable":
        """
        Buduje tabelę z wpisów (expert_id, cluster_id, rating).

        Args:
            entries: Wpisy w dowolnej kolejności
            weights: Opcjonalne wagi ω_i dla każdego eksperta
            id_map: Opcjonalna mapa etykiet

        Raises:
            RatingsValidationError: Ocena spoza {0,1} albo duplikat pary
            InvalidArgumentError: Brak/niepoprawna waga eksperta
        """
        rows = list(entries)
        experts = [row[0] for row in rows]
        clusters = [row[1] for row in rows]
        # oceny bez rzutowania na int - 0.5 ma zostać odrzucone, nie obcięte
        ratings = np.asarray([row[2] for row in rows], dtype=float)
        return cls.from_arrays(experts, clusters, ratings, weights=weights, id_map=id_map)

    @classmethod
    def from_arrays(
        cls,
        experts: Sequence[int],
        clusters: Sequence[int],
        ratings: Sequence[int],
        weights: Optional[Dict[int, float]] = None,
        id_map: Optional[IdMap] = None,
    ) -> "RatingsTable":
        """Jak from_entries(), ale z trzech równoległych tablic."""
        experts = np.asarray(experts, dtype=np.int64)
        clusters = np.asarray(clusters, dtype=np.int64)
        raw = np.asarray(ratings)

        if not (len(experts) == len(clusters) == len(raw)):
            raise InvalidArgumentError("experts, clusters and ratings must have equal length")

        bad = np.flatnonzero((raw != 0) & (raw != 1))
        if len(bad):
            raise RatingsValidationError(
                f"Ratings must be 0 or 1; found {raw[bad[0]]!r} at entry {int(bad[0])}",
                lines=[int(i) for i in bad],
            )

        order = np.lexsort((clusters, experts))
        experts, clusters = experts[order], clusters[order]
        ratings_arr = raw[order].astype(np.int8)

        if len(experts) > 1:
            dup = np.flatnonzero((np.diff(experts) == 0) & (np.diff(clusters) == 0))
            if len(dup):
                i = dup[0]
                raise RatingsValidationError(
                    f"Duplicate rating for expert {int(experts[i])}, cluster {int(clusters[i])}"
                )

        weights = cls._check_weights(weights, experts)

        for arr in (experts, clusters, ratings_arr):
            arr.setflags(write=False)
        return cls(experts=experts, clusters=clusters, ratings=ratings_arr,
                   weights=weights, id_map=id_map)

    @staticmethod
    def _check_weights(
        weights: Optional[Dict[int, float]],
        experts: np.ndarray,
    ) -> Optional[Dict[int, float]]:
        """Waliduje wagi i zawęża je do ekspertów obecnych w tabeli."""
        if weights is None:
            return None
        result: Dict[int, float] = {}
        for e in np.unique(experts):
            e = int(e)
            if e not in weights:
                raise InvalidArgumentError(f"Missing weight for expert {e}")
            w = float(weights[e])
            if not np.isfinite(w) or w <= 0:
                raise InvalidArgumentError(f"Weight for expert {e} must be positive, got {w}")
            result[e] = w
        return result

    # ─────────────────────────────────────────────────────────────────────────
    # ROZMIARY
    # ─────────────────────────────────────────────────────────────────────────

    @property
    def n_entries(self) -> int:
        return int(len(self.ratings))

    @property
    def n_experts(self) -> int:
        return int(len(self.expert_index))

    @property
    def n_clusters(self) -> int:
        return int(len(self.cluster_index))

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    @property
    def entries(self) -> List[Tuple[int, int, int]]:
        """Wpisy jako lista krotek (kolejność kanoniczna)."""
        return [
            (int(e), int(c), int(r))
            for e, c, r in zip(self.experts, self.clusters, self.ratings)
        ]

    # ─────────────────────────────────────────────────────────────────────────
    # TRANSFORMACJE
    # ─────────────────────────────────────────────────────────────────────────

    def restrict(self, cluster_ids: Iterable[int]) -> "RatingsTable":
        """
        Zwraca podtabelę z ocenami wybranych klastrów.

        Eksperci bez ocen w podzbiorze znikają; pozostali zachowują
        swoje wagi ω_i (liczone dla całej tabeli).
        """
        wanted = np.asarray(sorted(int(c) for c in cluster_ids), dtype=np.int64)
        return self._subtable(np.flatnonzero(np.isin(self.clusters, wanted)))

    def split(self, groups: Sequence[Iterable[int]]) -> List["RatingsTable"]:
        """
        Dzieli tabelę na podtabele rozłącznych grup klastrów jednym przejściem.

        Wynik dla grupy jest identyczny z restrict(grupa). Klastry spoza
        tabeli są pomijane.
        """
        label = np.full(self.n_clusters, -1, dtype=np.int64)
        for k, group in enumerate(groups):
            ids = np.asarray([int(c) for c in group], dtype=np.int64)
            pos = np.searchsorted(self.cluster_index, ids)
            known = (pos < self.n_clusters)
            known[known] &= self.cluster_index[pos[known]] == ids[known]
            label[pos[known]] = k

        entry_label = label[self.cluster_pos]
        order = np.argsort(entry_label, kind="stable")
        bounds = np.searchsorted(entry_label[order], np.arange(-1, len(groups) + 1))
        return [
            self._subtable(order[bounds[k + 1]:bounds[k + 2]])
            for k in range(len(groups))
        ]

    def _subtable(self, idx: np.ndarray) -> "RatingsTable":
        experts = self.experts[idx]
        weights = None
        if self.weights is not None:
            weights = {int(e): self.weights[int(e)] for e in np.unique(experts)}
        return RatingsTable(
            experts=_frozen(experts),
            clusters=_frozen(self.clusters[idx]),
            ratings=_frozen(self.ratings[idx]),
            weights=weights,
            id_map=self.id_map,
        )

    def with_weights(self, weights: Optional[Dict[int, float]]) -> "RatingsTable":
        """Ta sama tabela z innymi wagami (None = bez wag)."""
        return RatingsTable(
            experts=self.experts,
            clusters=self.clusters,
            ratings=self.ratings,
            weights=self._check_weights(weights, self.experts),
            id_map=self.id_map,
        )

    # ─────────────────────────────────────────────────────────────────────────
    # PODSUMOWANIA
    # ─────────────────────────────────────────────────────────────────────────

    def cluster_counts(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Liczba jedynek s_j i liczba ocen m_j dla każdego klastra.

        Returns:
            (successes, totals) w kolejności cluster_index
        """
        totals = np.bincount(self.cluster_pos, minlength=self.n_clusters)
        successes = np.bincount(self.cluster_pos, weights=self.ratings, minlength=self.n_clusters)
        return successes.astype(np.int64), totals.astype(np.int64)

    def observed_probability(self) -> Dict[int, float]:
        """Odsetek jedynek dla każdego klastra (surowe prawdopodobieństwo)."""
        successes, totals = self.cluster_counts()
        return {
            int(c): float(s) / float(m)
            for c, s, m in zip(self.cluster_index, successes, totals)
        }

    def expert_counts(self) -> Dict[int, int]:
        """|Λ_i| - liczba klastrów ocenionych przez każdego eksperta."""
        counts = np.bincount(self.expert_pos, minlength=self.n_experts)
        return {int(e): int(n) for e, n in zip(self.expert_index, counts)}

    def separated_clusters(self) -> Dict[int, int]:
        """
        Klastry z jednomyślnymi ocenami (same 0 albo same 1).

        Returns:
            Dict: cluster_id -> znak (-1 dla samych zer, +1 dla samych jedynek)
        """
        successes, totals = self.cluster_counts()
        result: Dict[int, int] = {}
        for c, s, m in zip(self.cluster_index, successes, totals):
            if s == 0:
                result[int(c)] = -1
            elif s == m:
                result[int(c)] = 1
        return result

    # ─────────────────────────────────────────────────────────────────────────
    # PORÓWNANIE
    # ─────────────────────────────────────────────────────────────────────────

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatingsTable):
            return NotImplemented
        return (
            np.array_equal(self.experts, other.experts)
            and np.array_equal(self.clusters, other.clusters)
            and np.array_equal(self.ratings, other.ratings)
            and self.weights == other.weights
            and self.id_map == other.id_map
        )

    def __repr__(self) -> str:
        return (
            f"RatingsTable(entries={self.n_entries}, experts={self.n_experts}, "
            f"clusters={self.n_clusters}, weighted={self.is_weighted})"
        )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr

"""
Strukturalny log przebiegu analizy do formatu JSON.

Każdy istotny krok procedury (dopasowanie podzbioru, koniec permutacji,
uśrednianie, wykryta separacja, zdegenerowany przedział, ...) jest
zapisywany z pełnym kontekstem. Log trafia do podsumowania biegu
(summary.json), więc każdy wynik da się prześledzić.

TYPY ZDARZEŃ:
═══════════════════════════════════════════════════════════════════

    RUN_START / RUN_END
    ─────────────────────────────────────────────────────────────
    Początek i koniec biegu (analyze / simulate / selfcheck).
    Data: command, seed / summary

    FIT_DONE / FIT_NOT_CONVERGED
    ─────────────────────────────────────────────────────────────
    Dopasowanie pełnej wiarygodności.
    Data: loglik, iterations, sigma2

    SEPARATION_DETECTED
    ─────────────────────────────────────────────────────────────
    Klaster z samymi 0 albo samymi 1 (β przycięte do ±β_cap).
    Data: clusters

    SUBSET_FITTED
    ─────────────────────────────────────────────────────────────
    Dopasowanie jednego podzbioru k w permutacji w.
    Data: permutation, subset, sigma2, converged

    PERMUTATION_DONE / POOLING_DONE
    ─────────────────────────────────────────────────────────────
    Koniec permutacji (σ̂²_w) i uśrednienie po W permutacjach.

    DEGENERATE_INTERVAL
    ─────────────────────────────────────────────────────────────
    P̂ numerycznie 0 lub 1 - przedział [0,0] albo [1,1].

    REPLICATION_DONE / REPLICATION_EXCLUDED
    ─────────────────────────────────────────────────────────────
    Replikacja badania symulacyjnego (wykluczona = brak zbieżności ML).

    CHECK_PASSED / CHECK_FAILED
    ─────────────────────────────────────────────────────────────
    Wynik pojedynczego testu selfcheck.

DETERMINIZM:
═══════════════════════════════════════════════════════════════════

    Procesy robocze NIE logują. Orkiestrator loguje po zebraniu wyników
    w ustalonej kolejności, a metadane nie zawierają znaczników czasu -
    ten sam seed daje bajt w bajt ten sam plik.

FORMAT LOGU:
═══════════════════════════════════════════════════════════════════

{
    "metadata": {"version": "1.0", "seed": 1, "command": "analyze"},
    "events": [
        {"step": 0, "type": "RUN_START", "data": {...}},
        {"step": 1, "type": "SUBSET_FITTED", "subject": "w0/k3", "data": {...}},
        ...
    ]
}
"""

from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Any, Dict, List, Optional
import json
from pathlib import Path


class EventType(Enum):
    """Typ zdarzenia w biegu."""

    # Bieg
    RUN_START = auto()
    RUN_END = auto()

    # Dopasowanie
    FIT_DONE = auto()
    FIT_NOT_CONVERGED = auto()
    SEPARATION_DETECTED = auto()

    # Procedura podziału
    SUBSET_FITTED = auto()
    PERMUTATION_DONE = auto()
    POOLING_DONE = auto()
    DEGENERATE_INTERVAL = auto()

    # Symulacja
    REPLICATION_DONE = auto()
    REPLICATION_EXCLUDED = auto()

    # Selfcheck
    CHECK_PASSED = auto()
    CHECK_FAILED = auto()


@dataclass
class RunEvent:
    """
    Pojedyncze zdarzenie w biegu.

    Attributes:
        step (int): Numer kolejny zdarzenia
        event_type (EventType): Typ zdarzenia
        subject (Optional[str]): Czego dotyczy (np. "w3/k7", "cluster 12")
        data (Dict): Dodatkowe dane specyficzne dla typu zdarzenia
    """
    step: int
    event_type: EventType
    subject: Optional[str] = None
    data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Serializuje zdarzenie do słownika."""
        result: Dict[str, Any] = {
            "step": self.step,
            "type": self.event_type.name,
        }
        if self.subject:
            result["subject"] = self.subject
        if self.data:
            result["data"] = self.data
        return result


class EventLogger:
    """
    Logger zdarzeń biegu.

    Zbiera zdarzenia w pamięci i serializuje je do JSON.

    Attributes:
        events (List[RunEvent]): Lista wszystkich zdarzeń
        metadata (Dict): Metadane biegu (wersja, seed, komenda)

    Example:
        >>> logger = EventLogger(seed=1, command="analyze")
        >>> logger.log_event(EventType.RUN_START, n_clusters=50)
        >>> logger.log_subset_fit(0, 3, sigma2=11.2, converged=True)
        >>> logger.to_dict()["events"][1]["subject"]
        'w0/k3'
    """

    def __init__(self, seed: int, command: str = "analyze"):
        """
        Args:
            seed: Ziarno główne biegu
            command: Nazwa podkomendy CLI
        """
        self.events: List[RunEvent] = []
        self.metadata: Dict[str, Any] = {
            "version": "1.0",
            "seed": seed,
            "command": command,
        }

    # ─────────────────────────────────────────────────────────────────────────
    # LOGOWANIE OGÓLNE
    # ─────────────────────────────────────────────────────────────────────────

    def log(self, event: RunEvent) -> None:
        """Dodaje zdarzenie do logu."""
        self.events.append(event)

    def log_event(
        self,
        event_type: EventType,
        subject: Optional[str] = None,
        **data: Any,
    ) -> RunEvent:
        """
        Tworzy i loguje zdarzenie z kolejnym numerem kroku.

        Returns:
            RunEvent: Utworzone zdarzenie
        """
        event = RunEvent(
            step=len(self.events),
            event_type=event_type,
            subject=subject,
            data=to_plain(dict(data)),
        )
        self.log(event)
        return event

    # ─────────────────────────────────────────────────────────────────────────
    # POMOCNICZE METODY LOGOWANIA
    # ─────────────────────────────────────────────────────────────────────────

    def log_fit(self, loglik: float, iterations: int, sigma2: float, converged: bool) -> None:
        """Loguje dopasowanie pełnej wiarygodności."""
        self.log_event(
            EventType.FIT_DONE if converged else EventType.FIT_NOT_CONVERGED,
            loglik=loglik,
            iterations=iterations,
            sigma2=sigma2,
        )

    def log_separation(self, clusters: List[int]) -> None:
        """Loguje klastry z quasi-całkowitą separacją."""
        if clusters:
            self.log_event(EventType.SEPARATION_DETECTED, clusters=sorted(clusters))

    def log_subset_fit(
        self,
        permutation: int,
        subset: int,
        sigma2: float,
        converged: bool,
        iterations: int = 0,
    ) -> None:
        """Loguje dopasowanie podzbioru k w permutacji w."""
        self.log_event(
            EventType.SUBSET_FITTED,
            subject=f"w{permutation}/k{subset}",
            sigma2=sigma2,
            converged=converged,
            iterations=iterations,
        )

    def log_permutation(self, permutation: int, sigma2_w: float, failed_subsets: int) -> None:
        """Loguje koniec permutacji."""
        self.log_event(
            EventType.PERMUTATION_DONE,
            subject=f"w{permutation}",
            sigma2_w=sigma2_w,
            failed_subsets=failed_subsets,
        )

    def log_pooling(self, sigma2: float, permutations: int) -> None:
        """Loguje uśrednienie po permutacjach."""
        self.log_event(EventType.POOLING_DONE, sigma2=sigma2, permutations=permutations)

    def log_degenerate_interval(self, cluster_id: int, prob: float) -> None:
        """Loguje zdegenerowany przedział ufności."""
        self.log_event(
            EventType.DEGENERATE_INTERVAL,
            subject=f"cluster {cluster_id}",
            prob=prob,
        )

    # ─────────────────────────────────────────────────────────────────────────
    # SERIALIZACJA
    # ─────────────────────────────────────────────────────────────────────────

    def to_dict(self) -> Dict[str, Any]:
        """Serializuje cały log do słownika."""
        return {
            "metadata": self.metadata,
            "events": [e.to_dict() for e in self.events],
        }

    def save(self, filepath: str) -> None:
        """Zapisuje log do pliku JSON."""
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)

    # ─────────────────────────────────────────────────────────────────────────
    # STATYSTYKI
    # ─────────────────────────────────────────────────────────────────────────

    def get_event_count(self) -> int:
        """Zwraca liczbę zdarzeń."""
        return len(self.events)

    def get_events_by_type(self, event_type: EventType) -> List[RunEvent]:
        """Filtruje zdarzenia po typie."""
        return [e for e in self.events if e.event_type == event_type]


def to_plain(value: Any) -> Any:
    """Zamienia typy numpy na typy JSON (float, int, list)."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        try:
            return value.item()
        except (ValueError, AttributeError):
            return value.tolist()
    return value

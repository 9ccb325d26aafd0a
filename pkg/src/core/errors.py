"""
Wyjątki domenowe procedury.

Każdy błąd dziedziczy po wbudowanym typie, który najlepiej go opisuje
(ValueError / KeyError / ArithmeticError), więc kod wołający może łapać
go tak jak zwykle. Wspólna baza SplitProcedureError pozwala CLI złapać
całą rodzinę i zamienić ją na niezerowy kod wyjścia.

HIERARCHIA:
═══════════════════════════════════════════════════════════════════

    SplitProcedureError
    ├── InvalidArgumentError   (ValueError)      - zły parametr wejściowy
    ├── ModelMismatchError     (KeyError)        - brak β dla ocenianego klastra
    ├── NumericOverflowError   (ArithmeticError) - nieskończoność / NaN w obliczeniach
    ├── InvalidPartitionError  (ValueError)      - podział niezgodny z danymi
    ├── RatingsParseError      (ValueError)      - wadliwy wiersz pliku CSV
    └── RatingsValidationError (ValueError)      - ocena spoza {0, 1}, duplikaty

Brak zbieżności optymalizatora NIE jest wyjątkiem - trafia do wyniku
(FitResult.converged = False).
"""

from __future__ import annotations
from typing import List, Optional


class SplitProcedureError(Exception):
    """Baza wszystkich błędów domenowych."""


class InvalidArgumentError(SplitProcedureError, ValueError):
    """Argument spoza dopuszczalnego zakresu."""


class ModelMismatchError(SplitProcedureError, KeyError):
    """Parametry modelu nie pasują do danych (brak β dla klastra)."""

    def __str__(self) -> str:
        # KeyError domyślnie opakowuje komunikat w cudzysłowy
        return str(self.args[0]) if self.args else ""


class NumericOverflowError(SplitProcedureError, ArithmeticError):
    """Wartość pośrednia wyszła poza zakres liczb skończonych."""


class InvalidPartitionError(SplitProcedureError, ValueError):
    """Podział klastrów nie pokrywa danych albo zawiera pusty podzbiór."""


class RatingsParseError(SplitProcedureError, ValueError):
    """
    Wiersz pliku z ocenami nie daje się sparsować.

    Attributes:
        line (Optional[int]): Numer linii w pliku (nagłówek = linia 1)
    """

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line


class RatingsValidationError(SplitProcedureError, ValueError):
    """
    Dane sparsowały się, ale łamią reguły tabeli ocen.

    Attributes:
        lines (List[int]): Numery linii, których dotyczy błąd
    """

    def __init__(self, message: str, lines: Optional[List[int]] = None):
        super().__init__(message)
        self.lines = list(lines or [])

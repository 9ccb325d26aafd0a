"""
Deterministyczne strumienie liczb losowych (RNG).

Procedura musi być w pełni powtarzalna - ten sam seed daje bit w bit
te same estymatory, niezależnie od liczby wątków/procesów. Dlatego:
- każdy strumień ma WŁASNĄ instancję StreamRNG
- strumienie potomne wyprowadzamy z klucza (seed, *indeksy), a nie
  z kolejności losowań - praca równoległa nie zmienia wyników

Wyprowadzanie kluczy:
    permutacja w                    -> StreamRNG.derive(seed, w)
    losowania MC dla klastra j w w  -> StreamRNG.derive(seed, w, j)
    replikacja r w symulacji        -> StreamRNG.derive(master_seed, KIND, r)

StreamRNG opakowuje numpy.random.Generator (PCG64) zasilany przez
numpy.random.SeedSequence z kluczem będącym krotką liczb całkowitych.

Przykład użycia:
    >>> rng = StreamRNG.derive(1, 3)
    >>> rng2 = StreamRNG.derive(1, 3)
    >>> float(rng.standard_normal(1)[0]) == float(rng2.standard_normal(1)[0])
    True

Ważne:
    NIGDY nie używaj np.random.* (stan globalny) w kodzie procedury!
    Zawsze przekazuj instancję StreamRNG.
"""

from __future__ import annotations
from typing import Sequence, Tuple

import numpy as np


# Maska na 64 bity - SeedSequence przyjmuje tylko nieujemne liczby
_SEED_MASK = (1 << 64) - 1


class StreamRNG:
    """
    Deterministyczny strumień losowości dla jednej jednostki pracy.

    Attributes:
        key (Tuple[int, ...]): Klucz, z którego wyprowadzono strumień
        generator (np.random.Generator): Wewnętrzny generator

    Example:
        >>> rng = StreamRNG(42)
        >>> child = rng.spawn(0, 7)   # klucz (42, 0, 7)
        >>> child.key
        (42, 0, 7)
    """

    def __init__(self, seed: int, *indices: int):
        """
        Tworzy strumień z klucza (seed, *indices).

        Args:
            seed: Ziarno główne (64-bit, ujemne są maskowane)
            *indices: Indeksy podstrumienia (permutacja, klaster, ...)
        """
        self.key: Tuple[int, ...] = tuple(int(v) & _SEED_MASK for v in (seed, *indices))
        self.generator = np.random.default_rng(np.random.SeedSequence(list(self.key)))

    @classmethod
    def derive(cls, seed: int, *indices: int) -> "StreamRNG":
        """Alias konstruktora czytelny w miejscu wywołania."""
        return cls(seed, *indices)

    def spawn(self, *indices: int) -> "StreamRNG":
        """
        Tworzy strumień potomny o kluczu (self.key, *indices).

        Nie zużywa losowań z bieżącego strumienia.
        """
        return StreamRNG(*self.key, *indices)

    # ─────────────────────────────────────────────────────────────────────────
    # LOSOWANIA
    # ─────────────────────────────────────────────────────────────────────────

    def standard_normal(self, size: int) -> np.ndarray:
        """Zwraca `size` losowań z N(0, 1)."""
        return self.generator.standard_normal(size)

    def normal(self, mean: float, variance: float, size: int) -> np.ndarray:
        """
        Losowania z N(mean, variance).

        Note:
            Parametrem jest WARIANCJA (nie odchylenie), tak jak σ² w modelu.
        """
        return mean + np.sqrt(variance) * self.generator.standard_normal(size)

    def poisson(self, lam: float) -> int:
        """Jedno losowanie z Poisson(lam)."""
        return int(self.generator.poisson(lam))

    def permutation(self, items: Sequence[int]) -> list:
        """
        Losowa permutacja elementów (Fisher-Yates w numpy).

        Returns:
            list: Nowa lista, wejście nie jest modyfikowane
        """
        order = self.generator.permutation(len(items))
        return [items[i] for i in order]

    def choice_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k różnych indeksów z range(n), jednostajnie."""
        return self.generator.choice(n, size=k, replace=False)

    def bernoulli(self, p: np.ndarray) -> np.ndarray:
        """Wektor prób Bernoulliego o prawdopodobieństwach p."""
        p = np.asarray(p, dtype=float)
        return (self.generator.random(p.shape) < p).astype(np.int8)

    def __repr__(self) -> str:
        return f"StreamRNG(key={self.key})"

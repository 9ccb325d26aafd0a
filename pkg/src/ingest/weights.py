"""
Wagi częstości ekspertów.

    ω_i = N / |Λ_i|

N - liczba różnych klastrów w tabeli, |Λ_i| - liczba klastrów ocenionych
przez eksperta i. Ekspert, który ocenił wszystko, ma wagę 1; wagi
niecałkowite zostają liczbami rzeczywistymi (wykładnik w wiarygodności).
"""

from __future__ import annotations
from typing import Dict

from ..model.ratings import RatingsTable


def compute_weights(table: RatingsTable) -> Dict[int, float]:
    """
    Example:
        >>> table = RatingsTable.from_entries([(1, 1, 1), (1, 2, 0), (2, 1, 1)])
        >>> compute_weights(table)
        {1: 1.0, 2: 2.0}
    """
    n_clusters = table.n_clusters
    return {e: n_clusters / count for e, count in table.expert_counts().items()}

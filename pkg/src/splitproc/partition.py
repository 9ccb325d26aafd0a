"""
Podział zbioru klastrów na rozłączne podzbiory.

    C = {c_1, ..., c_N}  --permutacja-->  [c_π1, ..., c_πN]
                         --bloki N_k-->   C¹ | C² | ... | C^S

    S = ceil(N / N_k); ostatni blok zawiera N - (S-1)·N_k klastrów.
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from math import ceil
from typing import Any, Dict, Iterable, List, Tuple

from ..core.errors import InvalidArgumentError
from ..core.rng import StreamRNG


class CIMode(Enum):
    """Sposób łączenia W przedziałów ufności."""
    AVERAGE = "average"
    UNION = "union"
    INTERSECTION = "intersection"


@dataclass(frozen=True)
class PartitionSpec:
    """
    Ustawienia procedury podziału.

    Attributes:
        subset_size (int): N_k ≥ 2
        permutations (int): W ≥ 1
        mc_draws (int): Q ≥ 1
        seed (int): Ziarno główne (64-bit)
        ci_level (float): Poziom ufności w (0, 1)
        ci_mode (CIMode): average | union | intersection
        bonferroni (bool): Poziom 1 - α/W dla każdej permutacji
    """
    subset_size: int = 30
    permutations: int = 20
    mc_draws: int = 10_000
    seed: int = 1
    ci_level: float = 0.95
    ci_mode: CIMode = CIMode.AVERAGE
    bonferroni: bool = False

    def __post_init__(self):
        if self.subset_size < 2:
            raise InvalidArgumentError(f"subset_size must be ≥ 2, got {self.subset_size}")
        if self.permutations < 1:
            raise InvalidArgumentError(f"permutations must be ≥ 1, got {self.permutations}")
        if self.mc_draws < 1:
            raise InvalidArgumentError(f"mc_draws must be ≥ 1, got {self.mc_draws}")
        if not 0.0 < self.ci_level < 1.0:
            raise InvalidArgumentError(f"ci_level must be in (0, 1), got {self.ci_level}")
        if not isinstance(self.ci_mode, CIMode):
            object.__setattr__(self, "ci_mode", CIMode(self.ci_mode))

    @property
    def effective_level(self) -> float:
        """Poziom ufności pojedynczej permutacji (z poprawką Bonferroniego)."""
        if self.bonferroni:
            return 1.0 - (1.0 - self.ci_level) / self.permutations
        return self.ci_level

    def n_subsets(self, n_clusters: int) -> int:
        """S = ceil(N / N_k)."""
        return ceil(n_clusters / self.subset_size)

    def validate_for(self, n_clusters: int) -> None:
        """
        Raises:
            InvalidArgumentError: N_k ≥ N (podział nie ma sensu)
        """
        if self.subset_size >= n_clusters:
            raise InvalidArgumentError(
                f"subset_size={self.subset_size} must be smaller than the number "
                f"of clusters ({n_clusters})"
            )

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "PartitionSpec":
        """Buduje PartitionSpec ze spłaszczonej sekcji `split`."""
        return cls(
            subset_size=int(settings.get("subset_size", 30)),
            permutations=int(settings.get("permutations", 20)),
            mc_draws=int(settings.get("mc_draws", 10_000)),
            seed=int(settings.get("seed", 1)),
            ci_level=float(settings.get("ci_level", 0.95)),
            ci_mode=CIMode(settings.get("ci_mode", "average")),
            bonferroni=bool(settings.get("bonferroni", False)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subset_size": self.subset_size,
            "permutations": self.permutations,
            "mc_draws": self.mc_draws,
            "seed": self.seed,
            "ci_level": self.ci_level,
            "ci_mode": self.ci_mode.value,
            "bonferroni": self.bonferroni,
        }


@dataclass(frozen=True)
class Partition:
    """
    S rozłącznych podzbiorów, których suma to cały zbiór klastrów.

    Attributes:
        subsets (Tuple[Tuple[int, ...], ...]): Podzbiory w kolejności permutacji
    """
    subsets: Tuple[Tuple[int, ...], ...]

    @property
    def n_subsets(self) -> int:
        return len(self.subsets)

    def cluster_ids(self) -> List[int]:
        """Wszystkie klastry (posortowane)."""
        return sorted(c for subset in self.subsets for c in subset)

    def subset_of(self) -> Dict[int, int]:
        """cluster_id -> indeks podzbioru."""
        return {c: k for k, subset in enumerate(self.subsets) for c in subset}

    @classmethod
    def single(cls, cluster_ids: Iterable[int]) -> "Partition":
        """Podział trywialny S = 1 (cały zbiór w jednym podzbiorze)."""
        return cls(subsets=(tuple(sorted(int(c) for c in cluster_ids)),))

    def to_dict(self) -> Dict[str, Any]:
        return {"subsets": [list(s) for s in self.subsets]}


def make_partition(cluster_ids: Iterable[int], subset_size: int, rng: StreamRNG) -> Partition:
    """
    Losowa permutacja klastrów pocięta na kolejne bloki po subset_size.

    Args:
        cluster_ids: Zbiór klastrów (kolejność wejścia nie ma znaczenia)
        subset_size: N_k
        rng: Strumień permutacji (klucz (seed, w))

    Raises:
        InvalidArgumentError: N_k < 2 albo N_k ≥ N

    Example:
        >>> p = make_partition(range(6), 2, StreamRNG(1, 0))
        >>> p.n_subsets
        3
    """
    ids = sorted(int(c) for c in cluster_ids)
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError("cluster_ids contain duplicates")
    if subset_size < 2:
        raise InvalidArgumentError(f"subset_size must be ≥ 2, got {subset_size}")
    if subset_size >= len(ids):
        raise InvalidArgumentError(
            f"subset_size={subset_size} must be smaller than the number of clusters ({len(ids)})"
        )

    shuffled = rng.permutation(ids)
    subsets = tuple(
        tuple(shuffled[start:start + subset_size])
        for start in range(0, len(shuffled), subset_size)
    )
    return Partition(subsets=subsets)

"""
Ingest - wczytywanie ocen i wag.

Zawiera:
- load_ratings / write_ratings: CSV <-> RatingsTable
- load_weights, compute_weights: Wagi ekspertów
- save_id_map / load_id_map: Mapa gęstych identyfikatorów
"""

from .loader import FormatOptions, load_ratings, write_ratings, load_weights, save_id_map, load_id_map
from .weights import compute_weights

__all__ = [
    "FormatOptions", "load_ratings", "write_ratings", "load_weights",
    "save_id_map", "load_id_map", "compute_weights",
]

"""
Split-Sample Ratings Analysis

Ranking klastrów (np. związków chemicznych) po prawdopodobieństwie
sukcesu z ocen ekspertów 0/1. Model logistyczny z losowym wyrazem
wolnym eksperta dopasowywany procedurą permutacyjnego podziału próby.
System jest deterministyczny i sterowany danymi (data-driven).
"""

__version__ = "0.1.0"

"""
Model logistyczny z losowym wyrazem wolnym eksperta.

Zawiera:
- RatingsTable: Rzadka tabela ocen 0/1 z opcjonalnymi wagami
- QuadratureRule / gauss_hermite: Kwadratura Gaussa-Hermite'a
- ModelParams, log_likelihood, log_likelihood_gradient: Wiarygodność brzegowa
- FitOptions, FitResult, fit_ml: Dopasowanie Newtonem-Raphsonem
"""

from .ratings import RatingsTable, IdMap
from .quadrature import QuadratureRule, gauss_hermite
from .likelihood import (
    ModelParams,
    LikelihoodTerms,
    log_likelihood,
    log_likelihood_gradient,
    log_likelihood_hessian,
    numeric_hessian,
    bernoulli_log_likelihood,
    evaluate,
)
from .fitting import FitOptions, FitResult, fit_ml, initial_beta

__all__ = [
    "RatingsTable", "IdMap",
    "QuadratureRule", "gauss_hermite",
    "ModelParams", "LikelihoodTerms",
    "log_likelihood", "log_likelihood_gradient", "log_likelihood_hessian",
    "numeric_hessian", "bernoulli_log_likelihood", "evaluate",
    "FitOptions", "FitResult", "fit_ml", "initial_beta",
]

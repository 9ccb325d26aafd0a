"""
Probability router - marginal success probability of a single cluster.
"""

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field
from typing import Dict

from src.core.errors import SplitProcedureError
from src.core.rng import StreamRNG
from src.splitproc.probability import (
    mc_standard_error,
    success_probability_from_draws,
    success_probability_quadrature,
)


router = APIRouter()


class ProbabilityRequest(BaseModel):
    """P_j for a given β_j and σ²."""
    beta: float
    sigma2: float = Field(..., ge=0)
    mc_draws: int = Field(10_000, ge=1, le=10_000_000)
    seed: int = Field(1, ge=0, lt=2**64)


@router.post("/probability")
def probability(request: ProbabilityRequest) -> Dict[str, float]:
    """
    Monte Carlo estimate (seeded) next to the deterministic quadrature value.
    """
    try:
        z = StreamRNG(request.seed).standard_normal(request.mc_draws)
        return {
            "prob_mc": float(success_probability_from_draws(request.beta, request.sigma2, z)),
            "prob_quadrature": float(success_probability_quadrature(request.beta, request.sigma2)),
            "mc_standard_error": mc_standard_error(request.beta, request.sigma2, z),
        }
    except SplitProcedureError as e:
        raise HTTPException(status_code=400, detail=str(e))

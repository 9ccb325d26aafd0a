"""
Analysis router - split procedure on ratings posted in the request body.
"""

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, ConfigDict, Field
from typing import Any, Dict, List, Literal

from src.core.errors import SplitProcedureError
from src.ingest.weights import compute_weights
from src.model.fitting import FitOptions
from src.model.ratings import RatingsTable
from src.splitproc.partition import PartitionSpec
from src.splitproc.procedure import run_procedure
from src.splitproc.ranking import estimate_success


router = APIRouter()


# ═══════════════════════════════════════════════════════════════════════════
# REQUEST/RESPONSE MODELS
# ═══════════════════════════════════════════════════════════════════════════

class Rating(BaseModel):
    """One (expert, cluster, 0/1) entry."""
    expert_id: int
    cluster_id: int
    rating: int


class AnalysisRequest(BaseModel):
    """Ratings plus procedure settings."""
    model_config = ConfigDict(extra="forbid")

    ratings: List[Rating] = Field(..., min_length=1)
    subset_size: int = Field(30, ge=2)
    permutations: int = Field(20, ge=1)
    mc_draws: int = Field(10_000, ge=1)
    seed: int = Field(1, ge=0, lt=2**64)
    ci_mode: Literal["average", "union", "intersection"] = "average"
    ci_level: float = Field(0.95, gt=0, lt=1)
    bonferroni: bool = False
    weighted: bool = False
    quadrature_order: int = Field(50, ge=1, le=200)


# ═══════════════════════════════════════════════════════════════════════════
# ENDPOINTS
# ═══════════════════════════════════════════════════════════════════════════

@router.post("/analyze")
def analyze(request: AnalysisRequest) -> Dict[str, Any]:
    """
    Runs the procedure and returns the ranked estimates.

    Domain errors (bad ratings, N_k ≥ N, ...) become HTTP 400.
    """
    try:
        table = RatingsTable.from_entries(
            (r.expert_id, r.cluster_id, r.rating) for r in request.ratings
        )
        if request.weighted:
            table = table.with_weights(compute_weights(table))
        spec = PartitionSpec.from_settings(request.model_dump())
        pooled, results = run_procedure(table, spec, FitOptions(quadrature_order=request.quadrature_order))
        estimates = estimate_success(table, pooled, results, spec)
    except SplitProcedureError as e:
        raise HTTPException(status_code=400, detail=str(e))

    return {
        "sigma2": pooled.sigma2,
        "sigma2_w": [r.sigma2_w for r in results],
        "estimates": [
            {
                "cluster_id": e.cluster_id,
                "beta_hat": e.beta_hat,
                "prob_estimated": e.prob_hat,
                "prob_observed": e.prob_observed,
                "ci_lower": e.ci_lower,
                "ci_upper": e.ci_upper,
                "rank": e.rank,
                "rank_ci_lower": e.rank_ci_lower,
                "separation_flag": e.flagged_separation,
            }
            for e in estimates
        ],
    }

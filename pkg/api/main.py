"""
FastAPI backend for the split-sample ratings analysis.

Endpoints:
    POST /api/probability  - marginal success probability (MC + quadrature)
    POST /api/analyze      - split procedure on posted ratings
    GET  /api/health       - health check
"""

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from contextlib import asynccontextmanager
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from api.routers import analysis, probability


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup/shutdown events."""
    print("Split-sample ratings API starting...")
    print("Docs at http://localhost:8000/docs")
    yield
    print("Split-sample ratings API shutting down...")


app = FastAPI(
    title="Split-Sample Ratings API",
    description="Random-intercept logistic model fitted by the split-sample procedure",
    version="1.0.0",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(probability.router, prefix="/api", tags=["Probability"])
app.include_router(analysis.router, prefix="/api", tags=["Analysis"])


@app.get("/api/health")
async def health():
    """API health check."""
    return {"status": "healthy"}

"""HTTP service wrapping the engine.

POST /run       execute a scenario, return report + trace + summary
POST /validate  parse a scenario document, return its normalized form
GET  /health    liveness probe

Requests carry the scenario as document text plus optional dotted-key
overrides, so the service is the single place where configs are parsed
and validated.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .config import parse_config
from .errors import EngineError
from .runner import run_scenario


class RunRequest(BaseModel):
    config_text: str = ""
    overrides: dict[str, str] = Field(default_factory=dict)


class SeedModel(BaseModel):
    master: int
    stream: int


class ReportModel(BaseModel):
    theta: float
    std: float
    ci_low: float
    ci_high: float
    n: int
    n2: int
    alpha: float
    seed: SeedModel
    estimator_kind: str


class TraceRowModel(BaseModel):
    i: int
    theta: float
    ci_low: float
    ci_high: float


class RunResponse(BaseModel):
    report: ReportModel
    trace: list[TraceRowModel]
    summary: str


class ValidateResponse(BaseModel):
    normalized: str
    estimator: str
    hurst: float
    n2: int
    paths: int
    alpha: float
    seed: int
    horizon: float


class HealthResponse(BaseModel):
    status: str
    version: str


app = FastAPI(title="fbmgreeks", version=__version__)


def _bad_request(exc: EngineError):
    status = 422 if exc.category == "config" else 500
    raise HTTPException(status_code=status, detail={"category": exc.category, "message": str(exc)})


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/validate", response_model=ValidateResponse)
def validate(request: RunRequest) -> ValidateResponse:
    try:
        config = parse_config(request.config_text, request.overrides)
    except EngineError as exc:
        _bad_request(exc)
    return ValidateResponse(
        normalized=config.to_text(),
        estimator=config.estimator,
        hurst=config.hurst,
        n2=config.n2,
        paths=config.paths,
        alpha=config.alpha,
        seed=config.seed,
        horizon=config.horizon,
    )


@app.post("/run", response_model=RunResponse)
def run(request: RunRequest) -> RunResponse:
    try:
        config = parse_config(request.config_text, request.overrides)
        result = run_scenario(config)
    except EngineError as exc:
        _bad_request(exc)
    report = result.report
    return RunResponse(
        report=ReportModel(
            theta=report.theta,
            std=report.std,
            ci_low=report.ci_low,
            ci_high=report.ci_high,
            n=report.n,
            n2=report.n2,
            alpha=report.alpha,
            seed=SeedModel(**report.seed.to_dict()),
            estimator_kind=report.estimator_kind,
        ),
        trace=[
            TraceRowModel(i=i, theta=th, ci_low=lo, ci_high=hi)
            for i, th, lo, hi in result.trace.rows()
        ],
        summary=result.summary,
    )

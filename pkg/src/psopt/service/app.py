"""FastAPI service wrapping the experiment harness.

The CLI talks to this app in-process by default; a real server can be
started with `uvicorn psopt.service.app:app`.
"""
from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import harness
from ..config import (OBJECTIVE_KINDS, OPTIMIZER_KINDS, SCALING_RULES,
                      SCHEDULE_KINDS)
from . import schemas


def _nan_safe(x: float) -> float:
    # JSON has no NaN; report aborted runs with an inf sentinel
    return x if math.isfinite(x) else float("inf")


def _summary(result: harness.RunResult) -> schemas.RunSummary:
    return schemas.RunSummary(config_hash=result.config_hash,
                              final_loss=_nan_safe(result.final_loss),
                              min_loss=_nan_safe(result.min_loss),
                              steps=result.steps, success=result.success,
                              failed=result.failed)


def create_app() -> FastAPI:
    app = FastAPI(title="psopt", version="0.1.0",
                  description="Learning-rate-free parameter-scaled optimizer benchmarks")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/list", response_model=schemas.ListResponse)
    def list_components() -> schemas.ListResponse:
        return schemas.ListResponse(
            optimizers=list(OPTIMIZER_KINDS),
            objectives=list(OBJECTIVE_KINDS),
            scalings=list(SCALING_RULES),
            schedules=list(SCHEDULE_KINDS),
            invariant_suites=sorted(harness.INVARIANT_SUITES) + ["all"],
        )

    @app.post("/run", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest) -> schemas.RunResponse:
        try:
            result, csv_text = harness.run_experiment(req.config)
        except harness.ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.RunResponse(summary=_summary(result), trace_csv=csv_text)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def run_sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
        try:
            results = harness.sweep(req.configs)
        except harness.ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        table = harness.format_table(req.configs, results)
        return schemas.SweepResponse(results=[_summary(r) for r in results],
                                     table=table)

    @app.post("/invariants", response_model=schemas.CheckReport)
    def invariants(req: schemas.InvariantsRequest) -> schemas.CheckReport:
        try:
            checks = harness.check_invariants(req.suite)
        except harness.ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        items = [schemas.CheckItem(name=c.name, passed=c.passed, detail=c.detail)
                 for c in checks]
        return schemas.CheckReport(checks=items,
                                   all_passed=all(c.passed for c in checks))

    @app.post("/gradcheck", response_model=schemas.CheckReport)
    def gradcheck(req: schemas.GradCheckRequest) -> schemas.CheckReport:
        checks = harness.gradient_check_report(h=req.h, points=req.points,
                                               seed=req.seed)
        items = [schemas.CheckItem(name=c.name, passed=c.passed, detail=c.detail)
                 for c in checks]
        return schemas.CheckReport(checks=items,
                                   all_passed=all(c.passed for c in checks))

    return app


app = create_app()

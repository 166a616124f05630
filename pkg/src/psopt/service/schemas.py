"""Request/response models for the HTTP service."""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict

from ..config import ExperimentConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunRequest(_Strict):
    config: ExperimentConfig


class RunSummary(_Strict):
    config_hash: str
    final_loss: float
    min_loss: float
    steps: int
    success: bool
    failed: bool


class RunResponse(_Strict):
    summary: RunSummary
    trace_csv: str


class SweepRequest(_Strict):
    configs: list[ExperimentConfig]


class SweepResponse(_Strict):
    results: list[RunSummary]
    table: str


class CheckItem(_Strict):
    name: str
    passed: bool
    detail: str


class InvariantsRequest(_Strict):
    suite: str = "all"


class CheckReport(_Strict):
    checks: list[CheckItem]
    all_passed: bool


class GradCheckRequest(_Strict):
    h: float = 1e-5
    points: int = 10
    seed: int = 23


class ListResponse(_Strict):
    optimizers: list[str]
    objectives: list[str]
    scalings: list[str]
    schedules: list[str]
    invariant_suites: list[str]


class ErrorResponse(_Strict):
    detail: str
    field: Optional[str] = None

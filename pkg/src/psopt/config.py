"""Experiment configuration schema.

A single ExperimentConfig fully determines a run (bitwise-reproducible
trace). Unknown keys are rejected everywhere: a typo in a hyperparameter
name must fail loudly, not silently fall back to a default.
"""
from __future__ import annotations

import hashlib
import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

OPTIMIZER_KINDS = ("sgd", "adam", "sps", "naive_sps", "ps_sps", "da_sgd", "ps_da_sgd")
OBJECTIVE_KINDS = ("quadratic", "l1", "logreg", "mlp")
SCALING_RULES = ("identity", "constant", "adam", "amsgrad")
SCHEDULE_KINDS = ("constant", "poly", "cosine")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ObjectiveSpec(_Strict):
    kind: Literal["quadratic", "l1", "logreg", "mlp"]
    dim: int = Field(default=2, ge=1)
    cond: float = Field(default=1.0, ge=1.0, description="quadratic condition number")
    n_samples: int = Field(default=200, ge=1, description="dataset size (logreg/mlp)")
    noise: float = Field(default=0.1, ge=0.0, le=0.5)
    margin: float = Field(default=0.0, ge=0.0)
    hidden: int = Field(default=8, ge=1, description="mlp hidden width")
    data_seed: int = 0


class ScalingSpec(_Strict):
    rule: Literal["identity", "constant", "adam", "amsgrad"] = "identity"
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)
    constant: Optional[list[float]] = None

    @model_validator(mode="after")
    def _constant_needs_values(self):
        if self.rule == "constant" and not self.constant:
            raise ValueError("scaling.constant is required for the constant rule")
        if self.constant is not None and any(c <= 0.0 for c in self.constant):
            raise ValueError("scaling.constant entries must be positive")
        return self


class OptimizerSpec(_Strict):
    kind: Literal["sgd", "adam", "sps", "naive_sps", "ps_sps", "da_sgd", "ps_da_sgd"]
    eta: float = Field(default=0.01, ge=0.0, description="sgd/adam learning rate")
    c: float = Field(default=0.5, gt=0.0, description="Polyak scaling parameter")
    d0: float = Field(default=1e-6, gt=0.0, description="initial distance lower bound")
    mu: float = Field(default=0.0, ge=0.0, lt=1.0, description="ps_da_sgd momentum")
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)
    f_star: Optional[float] = Field(default=None,
                                    description="override the objective's f*")


class ScheduleSpec(_Strict):
    kind: Literal["constant", "poly", "cosine"] = "constant"
    horizon: int = Field(default=1000, ge=1, description="cosine period in steps")


class ExperimentConfig(_Strict):
    objective: ObjectiveSpec
    optimizer: OptimizerSpec
    scaling: ScalingSpec = ScalingSpec()
    schedule: ScheduleSpec = ScheduleSpec()
    steps: int = Field(default=100, ge=0)
    batch_size: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    w0_scale: float = Field(default=1.0, gt=0.0, description="initial point spread")
    tolerance: float = Field(default=1e-6, gt=0.0, description="success threshold over f*")

    def config_hash(self) -> str:
        payload = json.dumps(self.model_dump(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

"""Per-coordinate scale factors for the parameter-scaled optimizers.

A scaling rule turns the gradient stream into a positive vector ``alpha``
such that dividing gradients by ``alpha**2`` reproduces the preconditioner
of the corresponding adaptive method (identity, a fixed constant, Adam's
sqrt of the second-moment EMA, or AMSGrad's running max of it).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import DomainError, as_vec, check_finite, ew_max

RULES = ("identity", "constant", "adam", "amsgrad")


@dataclass
class ScalingState:
    rule: str
    dim: int
    beta2: float = 0.999
    epsilon: float = 1e-8
    constant: np.ndarray | None = None
    v: np.ndarray = field(init=False)
    v_max: np.ndarray = field(init=False)
    step: int = field(init=False, default=0)

    def __post_init__(self):
        if self.rule not in RULES:
            raise DomainError(f"unknown scaling rule {self.rule!r}")
        if not 0.0 < self.beta2 < 1.0:
            raise DomainError("beta2 must lie in (0, 1)")
        if self.epsilon <= 0.0 and self.rule in ("adam", "amsgrad"):
            raise DomainError("epsilon must be positive")
        if self.rule == "constant":
            if self.constant is None:
                raise DomainError("constant rule needs a scale vector")
            self.constant = as_vec(self.constant)
            if self.constant.shape[0] != self.dim:
                raise DomainError("constant scale has wrong length")
            if np.any(self.constant <= 0.0):
                raise DomainError("constant scale must be strictly positive")
        self.v = np.zeros(self.dim)
        self.v_max = np.zeros(self.dim)


def make_scaling(rule: str, dim: int, beta2: float = 0.999,
                 epsilon: float = 1e-8, constant=None) -> ScalingState:
    return ScalingState(rule=rule, dim=dim, beta2=beta2, epsilon=epsilon,
                        constant=constant)


def update_and_get_alpha(state: ScalingState, g: np.ndarray) -> np.ndarray:
    """Advance the running statistics with gradient ``g`` and emit alpha.

    For the adam/amsgrad rules alpha satisfies alpha**2 = sqrt(v_hat) + eps
    with v_hat the bias-corrected second-moment estimate, so an SGD step on
    the alpha-scaled problem moves each coordinate by eta*g/(sqrt(v_hat)+eps).
    """
    g = check_finite(np.asarray(g, dtype=np.float64), "gradient")
    if g.shape[0] != state.dim:
        raise DomainError("gradient has wrong length")
    state.step += 1
    if state.rule == "identity":
        return np.ones(state.dim)
    if state.rule == "constant":
        return state.constant.copy()
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    v_hat = state.v / (1.0 - state.beta2 ** state.step)
    if state.rule == "amsgrad":
        state.v_max = ew_max(state.v_max, v_hat)
        v_hat = state.v_max
    return np.sqrt(np.sqrt(v_hat) + state.epsilon)


def effective_preconditioner(alpha: np.ndarray) -> np.ndarray:
    """Element-wise 1/alpha**2, the factor multiplying the raw gradient."""
    if np.any(alpha <= 0.0):
        raise DomainError("alpha must be strictly positive")
    return 1.0 / (alpha * alpha)

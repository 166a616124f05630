"""Optimizer step rules behind a uniform interface.

Implements the two parameter-scaled learning-rate-free methods (PS-SPS and
PS-DA-SGD), the baselines they are compared against (SGD, Adam, SPS,
D-Adapt SGD), and the deliberately broken naive-scaled SPS that shows why
simply dividing the gradient by alpha**2 inside SPS is inconsistent.

All low-level steps are pure functions over explicit state; the classes at
the bottom wrap them for the run loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .numerics import DomainError, check_finite, ew_max, inner, max_elem, norm2
from .scaling import ScalingState, update_and_get_alpha


class SkipStep(Exception):
    """Step denominator is zero; advance the iteration without moving."""


@dataclass
class StepReport:
    eta: float
    d: float | None = None
    skipped: bool = False
    extras: dict[str, float] = field(default_factory=dict)


def _require_positive_alpha(alpha: np.ndarray) -> None:
    if np.any(alpha <= 0.0):
        raise DomainError("alpha must be strictly positive")


# ---------------------------------------------------------------------------
# low-level steps


def sgd_step(w: np.ndarray, g: np.ndarray, eta: float) -> np.ndarray:
    if eta < 0.0:
        raise DomainError("eta must be nonnegative")
    return check_finite(w - eta * g, "sgd step")


@dataclass
class AdamState:
    dim: int
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)
    step: int = field(init=False, default=0)

    def __post_init__(self):
        self.m = np.zeros(self.dim)
        self.v = np.zeros(self.dim)


def adam_step(state: AdamState, w: np.ndarray, g: np.ndarray, eta: float) -> np.ndarray:
    """Bias-corrected Adam update."""
    if eta < 0.0:
        raise DomainError("eta must be nonnegative")
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = state.m / (1.0 - state.beta1 ** state.step)
    v_hat = state.v / (1.0 - state.beta2 ** state.step)
    return check_finite(w - eta * m_hat / (np.sqrt(v_hat) + state.epsilon), "adam step")


@dataclass
class SpsState:
    f_star: float
    c: float = 0.5

    def __post_init__(self):
        if self.c <= 0.0:
            raise DomainError("c must be positive")


def sps_lr(f_val: float, state: SpsState, g: np.ndarray) -> float:
    """Polyak step size (f - f*) / (c * ||g||^2), clamped at zero."""
    gg = inner(g, g)
    if gg == 0.0:
        raise SkipStep("zero gradient")
    return max(0.0, f_val - state.f_star) / (state.c * gg)


def naive_scaled_sps_step(w: np.ndarray, g: np.ndarray, f_val: float,
                          state: SpsState, alpha: np.ndarray) -> tuple[np.ndarray, StepReport]:
    """SPS with the gradient blindly replaced by g/alpha**2.

    Kept only to demonstrate the inconsistency: for a scalar alpha the
    displacement scales by alpha**2 instead of staying invariant.
    """
    _require_positive_alpha(alpha)
    u = g / (alpha * alpha)
    uu = inner(u, u)
    if uu == 0.0:
        raise SkipStep("zero gradient")
    eta = max(0.0, f_val - state.f_star) / (state.c * uu)
    return check_finite(w - eta * u, "naive sps step"), StepReport(eta=eta)


def ps_sps_step(w: np.ndarray, g: np.ndarray, f_val: float,
                state: SpsState, alpha: np.ndarray) -> tuple[np.ndarray, StepReport]:
    """Parameter-scaled Polyak step.

    Scales gradients by 1/alpha, applies the plain Polyak step in scaled
    space and maps back; algebraically identical to w - eta * g / alpha**2
    with eta computed from the scaled gradient norm.
    """
    _require_positive_alpha(alpha)
    g_s = g / alpha
    gg = inner(g_s, g_s)
    if gg == 0.0:
        raise SkipStep("zero gradient")
    eta = max(0.0, f_val - state.f_star) / (state.c * gg)
    w_new = w - eta * g_s / alpha
    return check_finite(w_new, "ps-sps step"), StepReport(eta=eta)


@dataclass
class PsDaState:
    w0: np.ndarray
    d: float = 1e-6
    mu: float = 0.0
    m: float = field(init=False, default=0.0)
    s: np.ndarray = field(init=False)
    g_max: np.ndarray = field(init=False)
    alpha_max: np.ndarray = field(init=False)
    z: np.ndarray = field(init=False)
    k: int = field(init=False, default=0)

    def __post_init__(self):
        if self.d <= 0.0:
            raise DomainError("d0 must be positive")
        if not 0.0 <= self.mu < 1.0:
            raise DomainError("momentum must lie in [0, 1)")
        self.w0 = np.array(self.w0, dtype=np.float64)
        dim = self.w0.shape[0]
        self.s = np.zeros(dim)
        self.g_max = np.zeros(dim)
        self.alpha_max = np.zeros(dim)
        self.z = np.zeros(dim)


def ps_da_sgd_step(w: np.ndarray, g: np.ndarray, state: PsDaState,
                   alpha: np.ndarray, gamma_k: float) -> tuple[np.ndarray, StepReport]:
    """Parameter-scaled D-Adapt SGD step.

    Maintains a nondecreasing lower bound d on the distance to the solution,
    shrunk each step by the worst ratio of the current scale to its running
    maximum so that a collapsing alpha cannot inflate the step size. The
    numerator/denominator recurrences for d use the raw gradient; the inner
    product <g', w0'-w'> equals <g, w0-w> exactly, so it is computed
    unscaled. Momentum, when enabled, buffers only the scaled gradient used
    in the parameter update.
    """
    _require_positive_alpha(alpha)
    alpha_max = ew_max(state.alpha_max, alpha)
    d_scaled = state.d * max_elem(alpha / alpha_max)
    g_max = ew_max(state.g_max, np.abs(g))
    denom = norm2(g_max / alpha_max)
    if denom == 0.0:
        raise SkipStep("gradient identically zero so far")
    eta = d_scaled * gamma_k / denom

    g_s = g / alpha
    z = state.mu * state.z + g_s
    w_new = (w * alpha - eta * z) / alpha

    s_scaled_norm = norm2(state.s / alpha)
    d_hat = state.m / s_scaled_norm if s_scaled_norm > 0.0 else state.d

    # commit state only after all quantities are computed
    state.alpha_max = alpha_max
    state.g_max = g_max
    state.z = z
    state.m = state.m + eta * inner(g, state.w0 - w)
    state.s = state.s + eta * g
    state.d = max(d_hat, state.d)
    state.k += 1
    report = StepReport(eta=eta, d=state.d,
                        extras={"d_hat": d_hat, "g_max_scaled_norm": denom})
    return check_finite(w_new, "ps-da-sgd step"), report


@dataclass
class DaSgdState:
    w0: np.ndarray
    d: float = 1e-6
    m: float = field(init=False, default=0.0)
    s: np.ndarray = field(init=False)
    g0_norm: float | None = field(init=False, default=None)
    k: int = field(init=False, default=0)

    def __post_init__(self):
        if self.d <= 0.0:
            raise DomainError("d0 must be positive")
        self.w0 = np.array(self.w0, dtype=np.float64)
        self.s = np.zeros(self.w0.shape[0])


def da_sgd_step(w: np.ndarray, g: np.ndarray, state: DaSgdState,
                gamma_k: float) -> tuple[np.ndarray, StepReport]:
    """Baseline D-Adapt SGD: eta_k = d_k * gamma_k / ||g0||."""
    if state.g0_norm is None:
        gn = norm2(g)
        if gn == 0.0:
            raise SkipStep("waiting for a nonzero gradient")
        state.g0_norm = gn
    eta = state.d * gamma_k / state.g0_norm
    w_new = w - eta * g

    s_norm = norm2(state.s)
    d_hat = state.m / s_norm if s_norm > 0.0 else state.d

    state.m = state.m + eta * inner(g, state.w0 - w)
    state.s = state.s + eta * g
    state.d = max(d_hat, state.d)
    state.k += 1
    return check_finite(w_new, "da-sgd step"), StepReport(eta=eta, d=state.d,
                                                          extras={"d_hat": d_hat})


# ---------------------------------------------------------------------------
# run-loop interface


class Optimizer:
    """Uniform step interface consumed by the run loop."""

    name = "base"

    def step(self, w: np.ndarray, f_val: float, g: np.ndarray,
             gamma: float = 1.0) -> tuple[np.ndarray, StepReport]:
        raise NotImplementedError

    def alpha_range(self) -> tuple[float, float]:
        return 1.0, 1.0


class _Scaled(Optimizer):
    def __init__(self, scaling: ScalingState):
        self.scaling = scaling
        self._last_alpha: np.ndarray | None = None

    def _alpha(self, g: np.ndarray) -> np.ndarray:
        self._last_alpha = update_and_get_alpha(self.scaling, g)
        return self._last_alpha

    def alpha_range(self) -> tuple[float, float]:
        if self._last_alpha is None:
            return 1.0, 1.0
        return float(np.min(self._last_alpha)), float(np.max(self._last_alpha))


class Sgd(Optimizer):
    name = "sgd"

    def __init__(self, eta: float):
        if eta < 0.0:
            raise DomainError("eta must be nonnegative")
        self.eta = eta

    def step(self, w, f_val, g, gamma=1.0):
        return sgd_step(w, g, self.eta), StepReport(eta=self.eta)


class Adam(Optimizer):
    name = "adam"

    def __init__(self, eta: float, dim: int, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        self.eta = eta
        self.state = AdamState(dim=dim, beta1=beta1, beta2=beta2, epsilon=epsilon)

    def step(self, w, f_val, g, gamma=1.0):
        return adam_step(self.state, w, g, self.eta), StepReport(eta=self.eta)


class Sps(Optimizer):
    name = "sps"

    def __init__(self, f_star: float, c: float = 0.5):
        self.state = SpsState(f_star=f_star, c=c)

    def step(self, w, f_val, g, gamma=1.0):
        eta = sps_lr(f_val, self.state, g)
        return sgd_step(w, g, eta), StepReport(eta=eta)


class NaiveScaledSps(_Scaled):
    name = "naive_sps"

    def __init__(self, f_star: float, scaling: ScalingState, c: float = 0.5):
        super().__init__(scaling)
        self.state = SpsState(f_star=f_star, c=c)

    def step(self, w, f_val, g, gamma=1.0):
        alpha = self._alpha(g)
        return naive_scaled_sps_step(w, g, f_val, self.state, alpha)


class PsSps(_Scaled):
    name = "ps_sps"

    def __init__(self, f_star: float, scaling: ScalingState, c: float = 0.5):
        super().__init__(scaling)
        self.state = SpsState(f_star=f_star, c=c)

    def step(self, w, f_val, g, gamma=1.0):
        alpha = self._alpha(g)
        return ps_sps_step(w, g, f_val, self.state, alpha)


class DAdaptSgd(Optimizer):
    name = "da_sgd"

    def __init__(self, w0: np.ndarray, d0: float = 1e-6):
        self.state = DaSgdState(w0=w0, d=d0)

    def step(self, w, f_val, g, gamma=1.0):
        return da_sgd_step(w, g, self.state, gamma)


class PsDaSgd(_Scaled):
    name = "ps_da_sgd"

    def __init__(self, w0: np.ndarray, scaling: ScalingState,
                 d0: float = 1e-6, mu: float = 0.0):
        super().__init__(scaling)
        self.state = PsDaState(w0=w0, d=d0, mu=mu)

    def step(self, w, f_val, g, gamma=1.0):
        alpha = self._alpha(g)
        return ps_da_sgd_step(w, g, self.state, alpha, gamma)


class StepTrace(NamedTuple):
    k: int
    w: np.ndarray
    loss: float
    eta: float
    d: float | None
    grad_norm: float
    alpha_min: float
    alpha_max: float
    skipped: bool


def run_iter(optimizer: Optimizer, objective, w0: np.ndarray, steps: int,
             schedule: Callable[[int], float] | None = None,
             rng: np.random.Generator | None = None,
             batch_size: int | None = None):
    """Yield one StepTrace per optimizer step.

    Deterministic given the rng seed; skip-step signals advance k without
    moving w. The recorded loss is always the full-batch value at w_k.
    """
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    w = np.array(w0, dtype=np.float64)
    for k in range(steps):
        gamma = schedule(k) if schedule is not None else 1.0
        batch = None
        if batch_size is not None and getattr(objective, "n_samples", None):
            if rng is None:
                raise DomainError("batch sampling requires an rng")
            batch = rng.integers(0, objective.n_samples, size=batch_size)
        loss = objective.value(w)
        f_val = objective.value(w, batch) if batch is not None else loss
        g = objective.gradient(w, batch)
        try:
            w_new, report = optimizer.step(w, f_val, g, gamma)
        except SkipStep:
            w_new, report = w, StepReport(eta=0.0, skipped=True)
        a_min, a_max = optimizer.alpha_range()
        yield StepTrace(k=k, w=w_new, loss=loss, eta=report.eta,
                        d=report.d, grad_norm=norm2(g),
                        alpha_min=a_min, alpha_max=a_max,
                        skipped=report.skipped)
        w = w_new


def run(optimizer: Optimizer, objective, w0: np.ndarray, steps: int,
        schedule: Callable[[int], float] | None = None,
        rng: np.random.Generator | None = None,
        batch_size: int | None = None) -> list[StepTrace]:
    """Collected form of run_iter."""
    return list(run_iter(optimizer, objective, w0, steps,
                         schedule=schedule, rng=rng, batch_size=batch_size))

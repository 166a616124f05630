"""Experiment runner: builds optimizer/objective pairs from a config,
records CSV traces, sweeps configurations, and runs the invariant suites.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import objectives as obj_mod
from . import optimizers as opt_mod
from .config import ExperimentConfig, ObjectiveSpec, ScalingSpec, ScheduleSpec
from .numerics import make_rng, norm2
from .scaling import ScalingState, make_scaling, update_and_get_alpha

TRACE_COLUMNS = ("step", "loss", "lr", "d", "grad_norm", "alpha_min", "alpha_max")


class ConfigError(ValueError):
    """A config is structurally valid but semantically unusable."""


class NanLossError(RuntimeError):
    """The objective produced a non-finite loss during a run."""

    def __init__(self, step: int):
        super().__init__(f"non-finite loss at step {step}")
        self.step = step


@dataclass
class TraceRecord:
    step: int
    loss: float
    lr: float
    d: Optional[float]
    grad_norm: float
    alpha_min: float
    alpha_max: float


@dataclass
class RunResult:
    config_hash: str
    final_loss: float
    min_loss: float
    steps: int
    success: bool
    failed: bool = False
    records: list[TraceRecord] = field(default_factory=list)

    def summary(self) -> dict:
        return {"config_hash": self.config_hash, "final_loss": self.final_loss,
                "min_loss": self.min_loss, "steps": self.steps,
                "success": self.success, "failed": self.failed}


def gamma(schedule: ScheduleSpec | str, k: int) -> float:
    """Annealing multiplier gamma_k for D-Adaptation-style methods."""
    if k < 0:
        raise ConfigError("k must be nonnegative")
    if isinstance(schedule, str):
        schedule = ScheduleSpec(kind=schedule)
    if schedule.kind == "constant":
        return 1.0
    if schedule.kind == "poly":
        # decreasing, sum diverges, sum of squares converges
        return float((k + 1) ** -0.75)
    if schedule.kind == "cosine":
        t = min(k, schedule.horizon) / schedule.horizon
        return 0.5 * (1.0 + math.cos(math.pi * t))
    raise ConfigError(f"unknown schedule kind {schedule.kind!r}")


def build_schedule(spec: ScheduleSpec) -> Callable[[int], float]:
    return lambda k: gamma(spec, k)


def build_objective(spec: ObjectiveSpec) -> obj_mod.Objective:
    if spec.kind == "quadratic":
        diag = np.logspace(0.0, math.log10(spec.cond), spec.dim) if spec.cond > 1.0 \
            else np.ones(spec.dim)
        return obj_mod.quadratic(diag, np.zeros(spec.dim))
    if spec.kind == "l1":
        return obj_mod.l1_lipschitz(np.zeros(spec.dim))
    dataset = obj_mod.SyntheticDataset.generate(
        seed=spec.data_seed, n=spec.n_samples, dim=spec.dim,
        noise=spec.noise, margin=spec.margin)
    if spec.kind == "logreg":
        return obj_mod.logistic_regression(dataset)
    if spec.kind == "mlp":
        return obj_mod.tiny_mlp(dataset, hidden=spec.hidden, seed=spec.data_seed)
    raise ConfigError(f"objective.kind: unknown objective {spec.kind!r}")


def initial_point(config: ExperimentConfig, objective: obj_mod.Objective) -> np.ndarray:
    if isinstance(objective, obj_mod.TinyMlp):
        return config.w0_scale * objective.init_params()
    rng = make_rng(config.seed)
    return config.w0_scale * rng.standard_normal(objective.dim)


def build_scaling(spec: ScalingSpec, dim: int) -> ScalingState:
    return make_scaling(spec.rule, dim, beta2=spec.beta2, epsilon=spec.epsilon,
                        constant=spec.constant)


def build_optimizer(config: ExperimentConfig, objective: obj_mod.Objective,
                    w0: np.ndarray) -> opt_mod.Optimizer:
    spec = config.optimizer
    kind = spec.kind

    def f_star() -> float:
        if spec.f_star is not None:
            return spec.f_star
        if objective.f_star is None:
            raise ConfigError(f"optimizer.kind: {kind} needs f* but objective "
                              f"{objective.name!r} has none; set optimizer.f_star")
        return objective.f_star

    def scaling() -> ScalingState:
        return build_scaling(config.scaling, objective.dim)

    if kind == "sgd":
        return opt_mod.Sgd(eta=spec.eta)
    if kind == "adam":
        return opt_mod.Adam(eta=spec.eta, dim=objective.dim, beta1=spec.beta1,
                            beta2=spec.beta2, epsilon=spec.epsilon)
    if kind == "sps":
        return opt_mod.Sps(f_star=f_star(), c=spec.c)
    if kind == "naive_sps":
        return opt_mod.NaiveScaledSps(f_star=f_star(), scaling=scaling(), c=spec.c)
    if kind == "ps_sps":
        return opt_mod.PsSps(f_star=f_star(), scaling=scaling(), c=spec.c)
    if kind == "da_sgd":
        return opt_mod.DAdaptSgd(w0=w0, d0=spec.d0)
    if kind == "ps_da_sgd":
        return opt_mod.PsDaSgd(w0=w0, scaling=scaling(), d0=spec.d0, mu=spec.mu)
    raise ConfigError(f"optimizer.kind: unknown optimizer {kind!r}")


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def records_to_csv(records: list[TraceRecord]) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRACE_COLUMNS) + "\n")
    for r in records:
        buf.write(",".join([str(r.step), _fmt(r.loss), _fmt(r.lr), _fmt(r.d),
                            _fmt(r.grad_norm), _fmt(r.alpha_min),
                            _fmt(r.alpha_max)]) + "\n")
    return buf.getvalue()


def run_experiment(config: ExperimentConfig,
                   out_path: Optional[str] = None) -> tuple[RunResult, str]:
    """Execute one configured run; returns the result and the trace CSV text.

    A non-finite loss aborts the run: the partial trace is still returned
    (and flushed to out_path if given) with the failed flag set.
    """
    objective = build_objective(config.objective)
    w0 = initial_point(config, objective)
    optimizer = build_optimizer(config, objective, w0)
    schedule = build_schedule(config.schedule)
    batch_rng = make_rng(config.seed + 1)

    records: list[TraceRecord] = []
    failed = False
    try:
        for t in opt_mod.run_iter(optimizer, objective, w0, config.steps,
                                  schedule=schedule, rng=batch_rng,
                                  batch_size=config.batch_size):
            if not math.isfinite(t.loss):
                raise NanLossError(t.k)
            records.append(TraceRecord(step=t.k, loss=t.loss, lr=t.eta, d=t.d,
                                       grad_norm=t.grad_norm,
                                       alpha_min=t.alpha_min,
                                       alpha_max=t.alpha_max))
    except (NanLossError, opt_mod.DomainError):
        failed = True

    csv_text = records_to_csv(records)
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            fh.write(csv_text)

    losses = [r.loss for r in records]
    final_loss = losses[-1] if losses else float("nan")
    min_loss = min(losses) if losses else float("nan")
    target = (objective.f_star if objective.f_star is not None else 0.0)
    success = bool(losses) and not failed and final_loss <= target + config.tolerance
    result = RunResult(config_hash=config.config_hash(), final_loss=final_loss,
                       min_loss=min_loss, steps=len(records), success=success,
                       failed=failed, records=records)
    return result, csv_text


def sweep(configs: list[ExperimentConfig]) -> list[RunResult]:
    """Run every config; per-run failures are recorded, not fatal."""
    results = []
    for cfg in configs:
        result, _ = run_experiment(cfg)
        results.append(result)
    return results


def format_table(configs: list[ExperimentConfig], results: list[RunResult]) -> str:
    lines = [f"{'optimizer':<12} {'objective':<10} {'final_loss':>14} "
             f"{'min_loss':>14} {'success':>8}"]
    for cfg, res in zip(configs, results):
        lines.append(f"{cfg.optimizer.kind:<12} {cfg.objective.kind:<10} "
                     f"{res.final_loss:>14.6g} {res.min_loss:>14.6g} "
                     f"{str(res.success):>8}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# invariant suites


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check_ps_sps_scale_equivalence(seed: int = 7) -> CheckResult:
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(20):
        dim = 4
        diag = np.exp(rng.uniform(-1, 1, dim))
        f = obj_mod.quadratic(diag, rng.standard_normal(dim))
        alpha = np.exp(rng.uniform(-1.5, 1.5, dim))
        w = rng.standard_normal(dim)
        state = opt_mod.SpsState(f_star=0.0, c=0.5)
        w_ps, _ = opt_mod.ps_sps_step(w, f.gradient(w), f.value(w), state, alpha)
        # plain SPS on the reparametrized problem, mapped back
        w_p = w * alpha
        g_p = f.gradient(w_p / alpha) / alpha
        eta = opt_mod.sps_lr(f.value(w_p / alpha), state, g_p)
        w_back = (w_p - eta * g_p) / alpha
        worst = max(worst, float(np.max(np.abs(w_ps - w_back))
                                 / max(1.0, np.max(np.abs(w_back)))))
    return CheckResult("ps_sps_scale_equivalence", worst <= 1e-10,
                       f"max rel err {worst:.3e} (tol 1e-10)")


def _check_ps_da_scalar_equivalence(seed: int = 11) -> CheckResult:
    rng = make_rng(seed)
    dim, steps, kappa = 3, 40, 3.0
    f = obj_mod.quadratic(np.ones(dim), np.zeros(dim))
    w0 = rng.standard_normal(dim)

    scal = make_scaling("constant", dim, constant=np.full(dim, kappa))
    opt_a = opt_mod.PsDaSgd(w0=w0, scaling=scal, d0=1e-6, mu=0.0)
    traj_a = opt_mod.run(opt_a, f, w0, steps)

    class Reparam(obj_mod.Objective):
        def __init__(self):
            super().__init__(dim=dim, f_star=0.0)

        def value(self, w, batch=None):
            return f.value(w / kappa)

        def gradient(self, w, batch=None):
            return f.gradient(w / kappa) / kappa

    ident = make_scaling("identity", dim)
    opt_b = opt_mod.PsDaSgd(w0=w0 * kappa, scaling=ident, d0=1e-6, mu=0.0)
    traj_b = opt_mod.run(opt_b, Reparam(), w0 * kappa, steps)
    worst = max(float(np.max(np.abs(a.w - b.w / kappa)) /
                      max(1e-30, np.max(np.abs(a.w))))
                for a, b in zip(traj_a, traj_b))
    return CheckResult("ps_da_sgd_scalar_equivalence", worst <= 1e-10,
                       f"max rel err {worst:.3e} (tol 1e-10)")


def _check_naive_inconsistency(seed: int = 13) -> CheckResult:
    rng = make_rng(seed)
    ok = True
    details = []
    for a in (0.5, 2.0, 10.0):
        dim = 3
        w = rng.standard_normal(dim)
        f = obj_mod.quadratic(np.ones(dim), np.zeros(dim))
        g, fv = f.gradient(w), f.value(w)
        alpha = np.full(dim, a)
        w_naive, _ = opt_mod.naive_scaled_sps_step(
            w, g, fv, opt_mod.SpsState(0.0, 0.5), alpha)
        eta = opt_mod.sps_lr(fv, opt_mod.SpsState(0.0, 0.5), g)
        disp_sps = eta * g
        ratio = (w - w_naive) / disp_sps
        err = float(np.max(np.abs(ratio - a * a)))
        ok &= err <= 1e-12 * a * a
        details.append(f"alpha={a}: ratio err {err:.2e}")
    return CheckResult("naive_sps_scales_like_alpha_sq", bool(ok), "; ".join(details))


def _check_d_monotone(seed: int = 17) -> CheckResult:
    rng = make_rng(seed)
    dim = 10
    f = obj_mod.l1_lipschitz(np.zeros(dim))
    w0 = rng.standard_normal(dim)
    opt = opt_mod.PsDaSgd(w0=w0, scaling=make_scaling("amsgrad", dim), d0=1e-6)
    traj = opt_mod.run(opt, f, w0, 2000)
    ds = [t.d for t in traj if t.d is not None]
    mono = all(b >= a for a, b in zip(ds, ds[1:]))
    return CheckResult("d_nondecreasing", mono,
                       f"d0={ds[0]:.3e} .. d_final={ds[-1]:.3e}")


def _check_skip_safety() -> CheckResult:
    dim = 3

    class Flat(obj_mod.Objective):
        def __init__(self):
            super().__init__(dim=dim, f_star=1.0)

        def value(self, w, batch=None):
            return 1.0

        def gradient(self, w, batch=None):
            return np.zeros(dim)

    w0 = np.ones(dim)
    opts = [
        opt_mod.Sps(f_star=1.0),
        opt_mod.PsSps(f_star=1.0, scaling=make_scaling("adam", dim)),
        opt_mod.DAdaptSgd(w0=w0),
        opt_mod.PsDaSgd(w0=w0, scaling=make_scaling("amsgrad", dim)),
    ]
    ok = True
    for opt in opts:
        traj = opt_mod.run(opt, Flat(), w0, 5)
        ok &= all(np.all(np.isfinite(t.w)) and np.allclose(t.w, w0) for t in traj)
    return CheckResult("zero_gradient_skip_safety", bool(ok),
                       "no movement, no NaN on constant objectives")


INVARIANT_SUITES = {
    "scale-equivalence": (_check_ps_sps_scale_equivalence,
                          _check_ps_da_scalar_equivalence),
    "naive-substitution": (_check_naive_inconsistency,),
    "d-monotonicity": (_check_d_monotone,),
    "skip-safety": (_check_skip_safety,),
}


def check_invariants(suite: str = "all") -> list[CheckResult]:
    if suite == "all":
        checks = [c for fns in INVARIANT_SUITES.values() for c in fns]
    elif suite in INVARIANT_SUITES:
        checks = list(INVARIANT_SUITES[suite])
    else:
        raise ConfigError(f"unknown invariant suite {suite!r}; "
                          f"choose from {sorted(INVARIANT_SUITES)} or 'all'")
    return [fn() for fn in checks]


def gradient_check_report(h: float = 1e-5, points: int = 10,
                          seed: int = 23) -> list[CheckResult]:
    """Compare every analytic gradient against central finite differences."""
    rng = make_rng(seed)
    dataset = obj_mod.SyntheticDataset.generate(seed=1, n=50, dim=5, noise=0.1)
    objs = [
        obj_mod.quadratic(np.array([1.0, 4.0, 9.0]), np.zeros(3)),
        obj_mod.l1_lipschitz(np.zeros(4)),
        obj_mod.logistic_regression(dataset),
        obj_mod.tiny_mlp(dataset, hidden=4, seed=2),
    ]
    out = []
    for obj in objs:
        worst = 0.0
        for _ in range(points):
            w = rng.standard_normal(obj.dim)
            if obj.name == "l1":
                # keep clear of the kinks where the subgradient is not unique
                w = np.where(np.abs(w) < 0.2, 0.5 * np.sign(w) + (w == 0), w)
            g = obj.gradient(w)
            fd = obj_mod.finite_diff_grad(obj, w, h)
            denom = max(norm2(g), 1e-12)
            worst = max(worst, norm2(g - fd) / denom)
        out.append(CheckResult(f"gradcheck_{obj.name}", worst <= 1e-5,
                               f"max rel err {worst:.3e} (tol 1e-5)"))
    return out

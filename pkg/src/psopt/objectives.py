"""Desk-scale differentiable test problems with analytic gradients.

Each objective exposes value(w, batch=None) and gradient(w, batch=None);
stochastic problems accept an index batch. finite_diff_grad is the
independent oracle used to verify every analytic gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .numerics import DomainError, as_vec, make_rng


@dataclass
class SyntheticDataset:
    """Gaussian-feature binary classification data, regenerable from seed."""

    features: np.ndarray
    labels: np.ndarray
    seed: int
    noise: float = 0.0
    margin: float = 0.0

    @classmethod
    def generate(cls, seed: int, n: int, dim: int, noise: float = 0.0,
                 margin: float = 0.0) -> "SyntheticDataset":
        if n < 1:
            raise DomainError("dataset must be nonempty")
        rng = make_rng(seed)
        x = rng.standard_normal((n, dim))
        w_true = rng.standard_normal(dim)
        w_true /= np.linalg.norm(w_true)
        scores = x @ w_true
        y = np.where(scores >= 0.0, 1.0, -1.0)
        if margin > 0.0:
            # push points away from the separating hyperplane
            x += margin * np.outer(y, w_true)
        if noise > 0.0:
            flip = rng.random(n) < noise
            y = np.where(flip, -y, y)
        return cls(features=x, labels=y, seed=seed, noise=noise, margin=margin)

    def spec(self) -> dict:
        """Seeded generator spec; datasets are serialized this way, never raw."""
        return {"seed": self.seed, "n": int(self.features.shape[0]),
                "dim": int(self.features.shape[1]),
                "noise": self.noise, "margin": self.margin}

    @classmethod
    def from_spec(cls, spec: dict) -> "SyntheticDataset":
        return cls.generate(seed=spec["seed"], n=spec["n"], dim=spec["dim"],
                            noise=spec.get("noise", 0.0),
                            margin=spec.get("margin", 0.0))


class Objective:
    """Differentiable problem: value, gradient, optional f*, w*, Lipschitz G."""

    def __init__(self, dim: int, f_star: float | None = None,
                 w_star: np.ndarray | None = None,
                 lipschitz_G: float | None = None,
                 n_samples: int | None = None, name: str = "objective"):
        self.dim = dim
        self.f_star = f_star
        self.w_star = w_star
        self.lipschitz_G = lipschitz_G
        self.n_samples = n_samples
        self.name = name

    def value(self, w: np.ndarray, batch=None) -> float:
        raise NotImplementedError

    def gradient(self, w: np.ndarray, batch=None) -> np.ndarray:
        raise NotImplementedError


class Quadratic(Objective):
    """f(w) = 0.5 * sum_i diag_i * (w_i - w*_i)**2."""

    def __init__(self, diag, w_star):
        diag = as_vec(diag)
        w_star = as_vec(w_star)
        if np.any(diag <= 0.0):
            raise DomainError("diag entries must be positive")
        if diag.shape != w_star.shape:
            raise DomainError("diag and w_star lengths differ")
        super().__init__(dim=diag.shape[0], f_star=0.0, w_star=w_star,
                         name="quadratic")
        self.diag = diag

    def value(self, w, batch=None):
        delta = w - self.w_star
        return float(0.5 * np.sum(self.diag * delta * delta))

    def gradient(self, w, batch=None):
        return self.diag * (w - self.w_star)


class L1(Objective):
    """f(w) = sum_i |w_i - w*_i| with subgradient sign, sign(0) = 0."""

    def __init__(self, w_star):
        w_star = as_vec(w_star)
        super().__init__(dim=w_star.shape[0], f_star=0.0, w_star=w_star,
                         lipschitz_G=float(np.sqrt(w_star.shape[0])), name="l1")

    def value(self, w, batch=None):
        return float(np.sum(np.abs(w - self.w_star)))

    def gradient(self, w, batch=None):
        return np.sign(w - self.w_star)


class LogisticRegression(Objective):
    """Mean logistic loss over the dataset (or a seeded index batch)."""

    def __init__(self, dataset: SyntheticDataset):
        if dataset.features.shape[0] < 1:
            raise DomainError("dataset must be nonempty")
        super().__init__(dim=int(dataset.features.shape[1]),
                         n_samples=int(dataset.features.shape[0]),
                         name="logreg")
        self.dataset = dataset
        self._f_star: float | None = None

    def _select(self, batch):
        if batch is None:
            return self.dataset.features, self.dataset.labels
        batch = np.asarray(batch)
        if batch.size == 0:
            raise DomainError("empty batch")
        return self.dataset.features[batch], self.dataset.labels[batch]

    def value(self, w, batch=None):
        x, y = self._select(batch)
        margins = -y * (x @ w)
        # log(1 + exp(m)) computed stably
        return float(np.mean(np.logaddexp(0.0, margins)))

    def gradient(self, w, batch=None):
        x, y = self._select(batch)
        s = 1.0 / (1.0 + np.exp(y * (x @ w)))  # sigma(-y <x,w>)
        return -(x * (y * s)[:, None]).mean(axis=0)

    @property
    def f_star(self):
        """Optimal full-batch loss, found by an independent solver and cached."""
        if self._f_star is None:
            res = optimize.minimize(self.value, np.zeros(self.dim),
                                    jac=self.gradient, method="L-BFGS-B",
                                    options={"maxiter": 5000, "ftol": 1e-16,
                                             "gtol": 1e-12})
            self._f_star = float(res.fun)
        return self._f_star

    @f_star.setter
    def f_star(self, value):
        self._f_star = value


class TinyMlp(Objective):
    """One hidden tanh layer with softmax cross-entropy, analytic backprop.

    Binary labels (+-1) map to two output classes. Parameters are the
    flattened (W1, b1, W2, b2).
    """

    def __init__(self, dataset: SyntheticDataset, hidden: int, seed: int):
        if hidden < 1:
            raise DomainError("hidden must be >= 1")
        d = int(dataset.features.shape[1])
        super().__init__(dim=d * hidden + hidden + hidden * 2 + 2,
                         f_star=0.0,  # lower bound only
                         n_samples=int(dataset.features.shape[0]), name="mlp")
        self.dataset = dataset
        self.hidden = hidden
        self.seed = seed
        self.in_dim = d

    def init_params(self) -> np.ndarray:
        rng = make_rng(self.seed)
        d, h = self.in_dim, self.hidden
        w1 = rng.standard_normal((d, h)) / np.sqrt(d)
        w2 = rng.standard_normal((h, 2)) / np.sqrt(h)
        return np.concatenate([w1.ravel(), np.zeros(h), w2.ravel(), np.zeros(2)])

    def _unpack(self, w):
        d, h = self.in_dim, self.hidden
        i = 0
        w1 = w[i:i + d * h].reshape(d, h); i += d * h
        b1 = w[i:i + h]; i += h
        w2 = w[i:i + h * 2].reshape(h, 2); i += h * 2
        b2 = w[i:i + 2]
        return w1, b1, w2, b2

    def _select(self, batch):
        if batch is None:
            return self.dataset.features, self.dataset.labels
        batch = np.asarray(batch)
        if batch.size == 0:
            raise DomainError("empty batch")
        return self.dataset.features[batch], self.dataset.labels[batch]

    def _forward(self, w, x):
        w1, b1, w2, b2 = self._unpack(w)
        hid = np.tanh(x @ w1 + b1)
        logits = hid @ w2 + b2
        logits = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(logits).sum(axis=1, keepdims=True))
        log_p = logits - log_z
        return hid, log_p

    def value(self, w, batch=None):
        x, y = self._select(batch)
        cls = ((y + 1) // 2).astype(int)
        _, log_p = self._forward(w, x)
        return float(-log_p[np.arange(x.shape[0]), cls].mean())

    def gradient(self, w, batch=None):
        x, y = self._select(batch)
        n = x.shape[0]
        cls = ((y + 1) // 2).astype(int)
        w1, b1, w2, b2 = self._unpack(w)
        hid, log_p = self._forward(w, x)
        p = np.exp(log_p)
        p[np.arange(n), cls] -= 1.0
        p /= n
        g_w2 = hid.T @ p
        g_b2 = p.sum(axis=0)
        d_hid = (p @ w2.T) * (1.0 - hid * hid)
        g_w1 = x.T @ d_hid
        g_b1 = d_hid.sum(axis=0)
        return np.concatenate([g_w1.ravel(), g_b1, g_w2.ravel(), g_b2])


def quadratic(diag, w_star) -> Quadratic:
    return Quadratic(diag, w_star)


def l1_lipschitz(w_star) -> L1:
    return L1(w_star)


def logistic_regression(dataset: SyntheticDataset) -> LogisticRegression:
    return LogisticRegression(dataset)


def tiny_mlp(dataset: SyntheticDataset, hidden: int, seed: int) -> TinyMlp:
    return TinyMlp(dataset, hidden, seed)


def finite_diff_grad(obj: Objective, w: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient oracle."""
    if h <= 0.0:
        raise DomainError("h must be positive")
    w = np.asarray(w, dtype=np.float64)
    g = np.zeros_like(w)
    for i in range(w.shape[0]):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (obj.value(w + e) - obj.value(w - e)) / (2.0 * h)
    return g

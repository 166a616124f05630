"""Dense vector arithmetic and seeded randomness shared by all modules.

Everything is 64-bit float and 1-d; parameters, gradients and scale
factors are all plain numpy arrays ("param vectors").
"""
from __future__ import annotations

import numpy as np


class ShapeMismatchError(ValueError):
    """Two vectors of different lengths were combined."""


class DomainError(ValueError):
    """An input is outside the mathematical domain of the operation."""


def as_vec(x) -> np.ndarray:
    """Coerce to a 1-d float64 array, rejecting NaN/Inf."""
    v = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if v.ndim != 1:
        raise DomainError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector contains NaN or Inf")
    return v


def check_finite(v: np.ndarray, what: str = "result") -> np.ndarray:
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{what} contains NaN or Inf")
    return v


def _check_same_length(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")


def ew_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise product a_i * b_i."""
    _check_same_length(a, b)
    return a * b


def ew_inv(a: np.ndarray) -> np.ndarray:
    """Element-wise reciprocal; all entries must be strictly positive."""
    if np.any(a <= 0.0):
        raise DomainError("ew_inv requires strictly positive entries")
    return 1.0 / a


def ew_max(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise maximum."""
    _check_same_length(a, b)
    return np.maximum(a, b)


def max_elem(a: np.ndarray) -> float:
    """Largest element of a vector."""
    return float(np.max(a))


def norm2(a: np.ndarray) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(a))


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product."""
    _check_same_length(a, b)
    return float(np.dot(a, b))


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; same seed gives the same stream everywhere.

    State is passed explicitly by callers, there is no module-level RNG.
    """
    return np.random.Generator(np.random.PCG64(int(seed)))

"""Learning-rate-free parameter-scaled optimizers and benchmark harness."""

from . import harness, numerics, objectives, optimizers, scaling
from .config import ExperimentConfig

__all__ = ["numerics", "scaling", "optimizers", "objectives", "harness",
           "ExperimentConfig"]

__version__ = "0.1.0"

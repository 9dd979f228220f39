"""Loss functions on the value space, with relaxed-triangle constants.

Every loss here is a power of a metric, so it vanishes on the diagonal
and satisfies loss(a, c) <= c_relaxed * (loss(b, a) + loss(b, c)) with
c_relaxed = max(1, 2**(p-1)); the squared loss gets c_relaxed = 2.
Unbounded losses expose witness pairs exceeding any requested threshold,
which is what the adversarial constructions feed on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundedLossError


@dataclass(frozen=True)
class LossModel:
    kind: str  # "squared" | "absolute" | "power" | "zero-one"
    value_space: str  # "real" | "vector" | "labels"
    power: float
    c_relaxed: float
    bounded: bool
    labels: tuple = ()
    dim: int = 1

    def evaluate(self, a, b) -> float:
        return self.fn(a, b)

    @property
    def fn(self):
        """Scalar loss as a plain callable (hot-path friendly)."""
        if self.kind == "squared" and self.value_space == "real":
            return _squared
        if self.kind == "absolute":
            return _absolute
        if self.kind == "zero-one":
            return _zero_one
        if self.value_space == "vector":
            p = self.power
            return lambda a, b: math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b))) ** p
        p = self.power
        return lambda a, b: abs(a - b) ** p

    @property
    def vector_fn(self):
        """Elementwise loss over numpy arrays (real value space only)."""
        if self.value_space != "real":
            raise ValueError("vectorized loss is only defined for real values")
        if self.kind == "squared":
            return lambda a, b: (a - b) ** 2
        if self.kind == "absolute":
            return lambda a, b: np.abs(a - b)
        p = self.power
        return lambda a, b: np.abs(a - b) ** p


def _squared(a, b):
    d = a - b
    return d * d


def _absolute(a, b):
    return abs(a - b)


def _zero_one(a, b):
    return 0.0 if a == b else 1.0


def squared_loss() -> LossModel:
    return LossModel("squared", "real", 2.0, 2.0, bounded=False)


def absolute_loss() -> LossModel:
    return LossModel("absolute", "real", 1.0, 1.0, bounded=False)


def power_loss(power: float) -> LossModel:
    """|a - b| ** power on the real line."""
    if power < 1:
        raise ValueError("power must be >= 1")
    return LossModel("power", "real", power, max(1.0, 2.0 ** (power - 1)), bounded=False)


def vector_squared_loss(dim: int) -> LossModel:
    """Squared Euclidean distance on R^dim."""
    return LossModel("squared", "vector", 2.0, 2.0, bounded=False, dim=dim)


def zero_one_loss(labels) -> LossModel:
    """Discrete mismatch loss on a finite label set (bounded)."""
    labels = tuple(labels)
    if len(labels) < 2:
        raise ValueError("need at least two labels")
    return LossModel("zero-one", "labels", 1.0, 1.0, bounded=True, labels=labels)


def default_value(model: LossModel):
    """The fixed fallback response: the value-space origin."""
    if model.value_space == "real":
        return 0.0
    if model.value_space == "vector":
        return (0.0,) * model.dim
    return model.labels[0]


def witness_pair(model: LossModel, threshold: float):
    """A pair of values whose loss meets the threshold.

    For metric-power losses the second value is threshold**(1/p) rounded up
    to the next integer, so the pair is exact, reproducible and monotone in
    the threshold.  Bounded losses cannot honor arbitrary thresholds.
    """
    if model.bounded:
        raise BoundedLossError(f"{model.kind} loss is bounded; no witness pair exists")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if threshold == 0:
        magnitude = 0.0
    else:
        magnitude = float(math.floor(threshold ** (1.0 / model.power)) + 1)

    def pair_for(m):
        if model.value_space == "vector":
            return ((0.0,) * model.dim, (m,) + (0.0,) * (model.dim - 1))
        return (0.0, m)

    pair = pair_for(magnitude)
    while model.evaluate(*pair) < threshold:  # guard against root rounding
        magnitude += 1.0
        pair = pair_for(magnitude)
    return pair

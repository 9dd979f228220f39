"""Frechet sample means over real or finite-label value spaces.

The sample mean of Y_1..Y_n under the power-p metric risk is any
minimizer of (1/n) * sum_i d(y, Y_i)**p.  The minimizer always lies in
the closed ball around the anchor y0 of radius 2 * [(1/n) sum d^p(y0,
Y_i)]**(1/p), which is what makes a grid search sound.  Closed forms are
used where they exist: the arithmetic mean for p = 2 on the real line,
and a sample median for p = 1 (some sample point is always optimal).
Ties break toward the smallest value so results are deterministic.

Streaming accumulators mirror the batch computation for the online
memorizer; their outputs agree with `frechet_mean` on the same multiset.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .seeding import rng
from .stats import aggregate

GRID_POINTS = 20001  # resolution (ball radius) / 1e4 over the confinement ball


@dataclass(frozen=True)
class FrechetProblem:
    samples: tuple
    power: float = 2.0
    anchor: float = 0.0  # reference value y0 anchoring the search ball
    space: str = "real"  # "real" | "labels"
    labels: tuple = ()

    def __post_init__(self):
        if not self.samples:
            raise ValueError("samples must be nonempty")
        if self.power < 1:
            raise ValueError("power must be >= 1")
        if self.space == "labels" and not self.labels:
            raise ValueError("label space needs a candidate label set")


@dataclass(frozen=True)
class FrechetResult:
    minimizer: object
    risk: float


def empirical_risk(y, problem: FrechetProblem) -> float:
    """(1/n) * sum_i d(y, Y_i)**power, exact average."""
    p = problem.power
    if problem.space == "labels":
        return math.fsum(0.0 if y == s else 1.0 for s in problem.samples) / len(problem.samples)
    return math.fsum(abs(y - s) ** p for s in problem.samples) / len(problem.samples)


def confinement_radius(problem: FrechetProblem) -> float:
    """Radius of the ball around the anchor certain to contain a minimizer."""
    n = len(problem.samples)
    p = problem.power
    anchor_risk = math.fsum(abs(problem.anchor - s) ** p for s in problem.samples) / n
    return 2.0 * anchor_risk ** (1.0 / p)


def frechet_mean(problem: FrechetProblem) -> FrechetResult:
    """Minimizer of the empirical power-p risk, with its risk.

    Exact for p = 2 (mean) and p = 1 (lower sample median) on the real
    line and for finite label sets; otherwise grid-optimal over the
    confinement ball at resolution radius/1e4, with the samples themselves
    added as candidates.
    """
    samples = problem.samples
    if problem.space == "labels":
        best = min(problem.labels, key=lambda y: (empirical_risk(y, problem), problem.labels.index(y)))
        return FrechetResult(best, empirical_risk(best, problem))
    if problem.power == 2.0:
        mean = math.fsum(samples) / len(samples)
        return FrechetResult(mean, empirical_risk(mean, problem))
    if problem.power == 1.0:
        ordered = sorted(samples)
        median = ordered[(len(ordered) - 1) // 2]  # smallest optimal sample
        return FrechetResult(median, empirical_risk(median, problem))

    radius = confinement_radius(problem)
    grid = np.linspace(problem.anchor - radius, problem.anchor + radius, GRID_POINTS)
    candidates = np.unique(np.concatenate([grid, np.asarray(samples, float)]))
    sample_arr = np.asarray(samples, float)
    risks = np.mean(
        np.abs(candidates[:, None] - sample_arr[None, :]) ** problem.power, axis=1
    )
    idx = int(np.argmin(risks))  # first minimum = smallest candidate value
    best = float(candidates[idx])
    return FrechetResult(best, empirical_risk(best, problem))


# --- streaming accumulators (the online memorizer delegates here) ---


class RunningMean:
    """Streaming p=2 real minimizer: running arithmetic mean."""

    __slots__ = ("count", "total")

    def __init__(self):
        self.count = 0
        self.total = 0.0

    def add(self, y):
        self.count += 1
        self.total += y

    @property
    def value(self):
        return self.total / self.count


class RunningMedian:
    """Streaming p=1 real minimizer: lower median via a sorted buffer."""

    __slots__ = ("buffer",)

    def __init__(self):
        self.buffer = []

    def add(self, y):
        bisect.insort(self.buffer, y)

    @property
    def value(self):
        return self.buffer[(len(self.buffer) - 1) // 2]


class RunningLabelCounts:
    """Streaming finite-label minimizer under any label loss."""

    __slots__ = ("counts", "loss", "labels")

    def __init__(self, loss_model):
        self.counts = {}
        self.loss = loss_model
        self.labels = loss_model.labels

    def add(self, y):
        self.counts[y] = self.counts.get(y, 0) + 1

    @property
    def value(self):
        fn = self.loss.fn

        def risk(y):
            return sum(n * fn(y, obs) for obs, n in self.counts.items())

        best = self.labels[0]
        best_risk = risk(best)
        for y in self.labels[1:]:
            r = risk(y)
            if r < best_risk:
                best, best_risk = y, r
        return best


class RunningBatch:
    """Fallback accumulator: keeps the multiset, recomputes on demand."""

    __slots__ = ("samples", "power", "anchor")

    def __init__(self, power: float, anchor: float = 0.0):
        self.samples = []
        self.power = power
        self.anchor = anchor

    def add(self, y):
        self.samples.append(y)

    @property
    def value(self):
        problem = FrechetProblem(tuple(self.samples), power=self.power, anchor=self.anchor)
        return frechet_mean(problem).minimizer


def accumulator_factory(loss_model):
    """Streaming Frechet-mean accumulator matching a loss model."""
    if loss_model.value_space == "labels":
        return lambda: RunningLabelCounts(loss_model)
    if loss_model.value_space != "real":
        raise ValueError("streaming accumulators support real or label values only")
    if loss_model.power == 2.0:
        return RunningMean
    if loss_model.power == 1.0:
        return RunningMedian
    return lambda: RunningBatch(loss_model.power)


# --- empirical-risk convergence check against a brute-force oracle ---


@dataclass(frozen=True)
class FiniteLaw:
    """Finite-support label distribution with explicit weights."""

    support: tuple
    weights: tuple | None = None

    def probabilities(self) -> np.ndarray:
        if self.weights is None:
            return np.full(len(self.support), 1.0 / len(self.support))
        w = np.asarray(self.weights, float)
        return w / w.sum()

    def sample(self, n: int, generator) -> np.ndarray:
        cdf = np.cumsum(self.probabilities())
        idx = np.minimum(np.searchsorted(cdf, generator.random(n), side="right"),
                         len(self.support) - 1)
        return np.asarray(self.support, float)[idx]


def population_minimum(law: FiniteLaw, power: float, grid_points: int = 10001) -> float:
    """Brute-force min_y of E d(y, Y)**power over a dense candidate grid."""
    support = np.asarray(law.support, float)
    probs = law.probabilities()
    lo, hi = float(support.min()), float(support.max())
    grid = np.unique(np.concatenate([np.linspace(lo, hi, grid_points), support]))
    risks = (np.abs(grid[:, None] - support[None, :]) ** power) @ probs
    return float(risks.min())


@dataclass(frozen=True)
class ConvergenceRow:
    sample_size: int
    trials: int
    mean_gap: float
    gap_upper: float
    population_risk: float


def check_convergence(law: FiniteLaw, power: float, sample_sizes, trials: int, seed: int):
    """Mean |empirical risk at the sample mean - population minimum| per n.

    The population minimum comes from the brute-force grid oracle, never
    from the closed forms the sample-mean path might share.
    """
    target = population_minimum(law, power)
    rows = []
    for n in sample_sizes:
        gaps = []
        for t in range(trials):
            g = rng(seed, "frechet-convergence", n, t)
            samples = law.sample(n, g)
            result = frechet_mean(FrechetProblem(tuple(samples.tolist()), power=power))
            gaps.append(abs(result.risk - target))
        summary = aggregate(gaps, "mean")
        rows.append(ConvergenceRow(n, trials, summary.estimate, summary.upper, target))
    return rows

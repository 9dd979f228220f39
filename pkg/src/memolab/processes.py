"""Streaming generators of the instance process, plus prefix statistics.

Each sampler is an immutable descriptor; rollouts are pure functions of
(sampler.seed, stream, horizon) and are prefix-stable: extending the
horizon never changes earlier points.  Distinctness downstream is exact
equality of represented points, so generators emit exactly representable
values.  The geometric-decay family emits dyadic Fractions because its
gaps shrink below float resolution long before the horizons the schedule
estimator needs.

support_class declares the truth about the number of distinct values:
"certainly-finite", "certainly-infinite", or "mixed" (one seeded coin at
rollout start selects the finite or the infinite branch, so the infinite
event is analytically known per rollout).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .seeding import rng


@dataclass(frozen=True)
class Rollout:
    points: object  # ndarray or list
    infinite_branch: bool | None  # set only for mixed samplers


@dataclass(frozen=True)
class FiniteSupportIID:
    """i.i.d. draws from a finite set of exactly representable points."""

    support: tuple
    weights: tuple | None = None
    seed: int = 0

    kind = "finite-support-iid"
    support_class = "certainly-finite"
    deterministic = False

    def __post_init__(self):
        if not self.support:
            raise ValueError("support must be nonempty")
        if self.weights is not None and len(self.weights) != len(self.support):
            raise ValueError("weights must match support")

    def _generate(self, horizon: int, stream: int) -> Rollout:
        g = rng(self.seed, "rollout", stream)
        n = len(self.support)
        probs = np.full(n, 1.0 / n) if self.weights is None else np.asarray(self.weights, float)
        cdf = np.cumsum(probs / probs.sum())
        idx = np.searchsorted(cdf, g.random(horizon), side="right")
        idx = np.minimum(idx, n - 1)
        return Rollout(np.asarray(self.support, float)[idx], None)


@dataclass(frozen=True)
class UniformIID:
    """i.i.d. uniform draws on [low, high); almost surely all distinct."""

    seed: int = 0
    low: float = 0.0
    high: float = 1.0

    kind = "iid-uniform"
    support_class = "certainly-infinite"
    deterministic = False

    def _generate(self, horizon: int, stream: int) -> Rollout:
        g = rng(self.seed, "rollout", stream)
        return Rollout(self.low + (self.high - self.low) * g.random(horizon), None)


@dataclass(frozen=True)
class GeometricDecay:
    """Deterministic dyadic decay 1/2, 1/4, 1/8, ... as exact Fractions.

    Exists to defeat any fixed-rate interval construction: its minimum gap
    at horizon t is 2**-t, so any a-priori interval width is eventually too
    coarse.  Points are Fractions so distinctness survives arbitrarily deep
    horizons.
    """

    seed: int = 0

    kind = "geometric-decay"
    support_class = "certainly-infinite"
    deterministic = True

    def _generate(self, horizon: int, stream: int) -> Rollout:
        return Rollout([Fraction(1, 2 ** t) for t in range(1, horizon + 1)], None)


@dataclass(frozen=True)
class DeterministicList:
    """Fixed finite script, cycled past its end."""

    values: tuple
    seed: int = 0

    kind = "deterministic-list"
    support_class = "certainly-finite"
    deterministic = True

    def __post_init__(self):
        if not self.values:
            raise ValueError("values must be nonempty")

    def _generate(self, horizon: int, stream: int) -> Rollout:
        n = len(self.values)
        return Rollout([self.values[t % n] for t in range(horizon)], None)


@dataclass(frozen=True)
class MixedSupport:
    """Flips one seeded coin, then behaves as the finite or infinite branch.

    Realizes processes with 0 < P(infinitely many values) < 1 while keeping
    the branch indicator known per rollout, so conditioning never has to be
    estimated.
    """

    finite: object
    infinite: object
    infinite_prob: float
    seed: int = 0

    kind = "mixed"
    support_class = "mixed"
    deterministic = False

    def __post_init__(self):
        if not 0.0 < self.infinite_prob < 1.0:
            raise ValueError("infinite_prob must lie in (0, 1)")

    def _generate(self, horizon: int, stream: int) -> Rollout:
        coin = rng(self.seed, "branch", stream).random()
        branch = self.infinite if coin < self.infinite_prob else self.finite
        inner = branch._generate(horizon, stream)
        return Rollout(inner.points, coin < self.infinite_prob)


@dataclass(frozen=True)
class AlternatingAdversarial:
    """Deterministic mode-switching process from the fooling construction.

    Segments alternate between the constant anchor and fresh points of a
    distinct enumeration (indexed by the global round, so values never
    repeat across distinct segments).  switch_indices give the last round
    of each completed segment; the final mode continues forever.
    """

    switch_indices: tuple
    anchor: object
    enumeration: Callable[[int], object]
    seed: int = 0

    kind = "alternating-adversarial"
    deterministic = True

    def __post_init__(self):
        if list(self.switch_indices) != sorted(set(self.switch_indices)):
            raise ValueError("switch_indices must be strictly increasing")

    @property
    def support_class(self) -> str:
        # final segment constant -> finitely many values, else infinitely many
        return "certainly-finite" if len(self.switch_indices) % 2 == 1 else "certainly-infinite"

    def point_at(self, t: int):
        """Value at round t (1-based): constant mode first, then alternating."""
        mode = 0
        for boundary in self.switch_indices:
            if t <= boundary:
                break
            mode += 1
        return self.anchor if mode % 2 == 0 else self.enumeration(t)

    def _generate(self, horizon: int, stream: int) -> Rollout:
        return Rollout([self.point_at(t) for t in range(1, horizon + 1)], None)


def rollout(sampler, horizon: int, stream: int = 0):
    """Points X_1..X_horizon; deterministic given (sampler.seed, stream)."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return sampler._generate(horizon, stream).points


def rollout_info(sampler, horizon: int, stream: int = 0) -> Rollout:
    """Rollout plus the branch indicator for mixed samplers."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return sampler._generate(horizon, stream)


@dataclass(frozen=True)
class PrefixStats:
    """Distinct-value count and minimum pairwise gap of a finite prefix."""

    horizon: int
    distinct_count: int
    min_gap: object | None  # None when fewer than two distinct values


def prefix_stats(prefix: Sequence, space=None) -> PrefixStats:
    """Exact distinct count and minimum distance over distinct pairs.

    For 1-d numeric points the gap comes from sorted adjacent differences;
    a space with a custom metric triggers the quadratic pairwise scan.
    """
    points = list(prefix)
    if not points:
        raise ValueError("prefix must be nonempty")
    distinct = sorted(set(points))
    if len(distinct) < 2:
        return PrefixStats(len(points), len(distinct), None)
    if space is None or space.kind in ("unit-interval", "real-line"):
        gap = min(b - a for a, b in zip(distinct, distinct[1:]))
    else:
        gap = min(
            space.distance(a, b)
            for i, a in enumerate(distinct)
            for b in distinct[i + 1 :]
        )
    return PrefixStats(len(points), len(distinct), gap)


def distinct_counts(points: Sequence) -> np.ndarray:
    """Cumulative number of distinct values after each round."""
    seen = set()
    out = np.empty(len(points), dtype=np.int64)
    count = 0
    for i, x in enumerate(points):
        if x not in seen:
            seen.add(x)
            count += 1
        out[i] = count
    return out


_FAMILIES = {
    "finite-support-iid": FiniteSupportIID,
    "iid-uniform": UniformIID,
    "geometric-decay": GeometricDecay,
    "deterministic-list": DeterministicList,
    "mixed": MixedSupport,
    "alternating-adversarial": AlternatingAdversarial,
}


def sampler_family(kind: str):
    try:
        return _FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown sampler family {kind!r}") from None

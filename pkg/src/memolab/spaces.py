"""Separable metric instance spaces and greedy disjoint covers.

A space pairs a metric with a fixed countable dense enumeration.  Covers
are built greedily from that enumeration: cell k is the closed ball of
radius delta/2 around the k-th dense point minus all earlier cells, so
cells are pairwise disjoint, have diameter at most delta, and the full
(infinite) sequence covers the space.  Membership is decided by scanning
balls in enumeration order and taking the first hit, which realizes the
set subtraction exactly.

Dense enumerations are deterministic per space kind (dyadic midpoints in
breadth-first order for intervals and boxes, the points themselves for
finite sets), so identical inputs always produce identical covers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import HorizonInsufficientError
from .processes import rollout
from .stats import binomial_upper

COVER_INDEX_CAP = 2**20  # hard cap on cover length searched by cover_for_process


def _unit_interval_dense(index: int) -> float:
    # breadth-first dyadic midpoints: 1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, ...
    level = index.bit_length()
    offset = index - (1 << (level - 1))  # 0-based within level
    return (2 * offset + 1) / (1 << level)


def _real_line_dense() -> Iterator[float]:
    # stage s emits the dyadics j/2^s with |j/2^s| <= s not emitted earlier,
    # ordered by (|value|, sign); stage 0 emits just 0
    yield 0.0
    for stage in itertools.count(1):
        scale = 1 << stage
        fresh = []
        for j in range(-stage * scale, stage * scale + 1):
            value = j / scale
            emitted = abs(value) <= stage - 1 and (j % 2 == 0)
            if not emitted:
                fresh.append(value)
        fresh.sort(key=lambda v: (abs(v), v < 0))
        yield from fresh


def _box_dense(dim: int) -> Iterator[tuple]:
    # per-level product grids of dyadic midpoints, lexicographic within level
    for level in itertools.count(1):
        axis = [(2 * i + 1) / (1 << level) for i in range(1 << (level - 1))]
        for combo in itertools.product(axis, repeat=dim):
            yield combo


@dataclass(frozen=True)
class MetricSpace:
    """A separable metric space with a fixed dense enumeration.

    kind: "unit-interval" | "real-line" | "box" | "finite"
    """

    kind: str
    dim: int = 1
    points: tuple = ()
    _dense_cache: list = field(default_factory=list, repr=False, compare=False)
    _dense_iter: list = field(default_factory=list, repr=False, compare=False)

    def distance(self, a, b) -> float:
        if self.kind in ("unit-interval", "real-line"):
            return abs(a - b)
        if self.kind == "box":
            return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
        if self.kind == "finite":
            return 0.0 if a == b else 1.0
        raise ValueError(f"unknown space kind {self.kind!r}")

    def dense_point(self, index: int):
        """index-th element (1-based) of the dense enumeration."""
        if index < 1:
            raise ValueError("dense enumeration is 1-based")
        if self.kind == "unit-interval":
            return _unit_interval_dense(index)
        if self.kind == "finite":
            return self.points[(index - 1) % len(self.points)]
        cache = self._dense_cache
        if not self._dense_iter:
            source = _real_line_dense() if self.kind == "real-line" else _box_dense(self.dim)
            self._dense_iter.append(source)
        it = self._dense_iter[0]
        while len(cache) < index:
            cache.append(next(it))
        return cache[index - 1]

    def dense_prefix(self, count: int) -> list:
        return [self.dense_point(i) for i in range(1, count + 1)]


def unit_interval() -> MetricSpace:
    return MetricSpace("unit-interval")


def real_line() -> MetricSpace:
    return MetricSpace("real-line")


def box(dim: int) -> MetricSpace:
    if dim < 1:
        raise ValueError("box needs dim >= 1")
    return MetricSpace("box", dim=dim)


def finite_space(points: Sequence) -> MetricSpace:
    if not points:
        raise ValueError("finite space needs at least one point")
    return MetricSpace("finite", points=tuple(points))


@dataclass(frozen=True)
class CoverCell:
    """Ball of radius delta/2 around a dense point, minus all earlier cells.

    The subtraction is positional: a point belongs to the cell iff this is
    the first ball in the cover that contains it.
    """

    index: int  # 1-based position in the cover sequence
    center: object
    radius: float


class Cover:
    """Ordered prefix of the greedy cover; immutable after construction."""

    def __init__(self, space: MetricSpace, delta: float, cells: list[CoverCell]):
        self.space = space
        self.delta = delta
        self.cells = cells

    def __len__(self) -> int:
        return len(self.cells)

    def first_ball(self, x) -> int | None:
        """1-based index of the first ball containing x, scanning in order."""
        dist = self.space.distance
        for cell in self.cells:
            if dist(x, cell.center) <= cell.radius:
                return cell.index
        return None

    def cell_of(self, x) -> int | None:
        """Index of the cover cell containing x (None if outside the prefix)."""
        return self.first_ball(x)

    def contains(self, index: int, x) -> bool:
        return self.first_ball(x) == index


def greedy_cover(space: MetricSpace, delta: float, count: int) -> Cover:
    """First `count` cells of the greedy ball cover at scale delta.

    Cells may be empty when a ball is swallowed by earlier ones; they are
    kept so indices line up with the dense enumeration.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    radius = delta / 2
    cells = [CoverCell(i, space.dense_point(i), radius) for i in range(1, count + 1)]
    return Cover(space, delta, cells)


def _first_ball_index(space: MetricSpace, delta: float, x, cap: int) -> int:
    """Index of the first dense ball containing x, or cap + 1 if none found."""
    radius = delta / 2
    dist = space.distance
    for k in range(1, cap + 1):
        if dist(x, space.dense_point(k)) <= radius:
            return k
    return cap + 1


def cover_for_process(
    space: MetricSpace,
    sampler,
    epsilon: float,
    delta: float,
    min_count: int,
    horizon: int,
    trials: int,
    stream_base: int = 0,
) -> tuple[int, Cover]:
    """Smallest certified cover prefix the process rarely escapes.

    Runs `trials` fresh rollouts of length `horizon` and finds the smallest
    M >= min_count such that the empirical frequency of a rollout leaving
    the first M cells, plus its one-sided 0.99 binomial margin, stays below
    epsilon.  Raises HorizonInsufficientError when no M up to the internal
    cap certifies.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if min_count < 1 or horizon < 1 or trials < 1:
        raise ValueError("min_count, horizon and trials must be >= 1")
    if binomial_upper(0, trials) >= epsilon:
        raise ValueError(
            f"trials={trials} cannot certify escape rate below {epsilon} even with zero escapes"
        )

    # deepest ball needed by any point of any rollout, capped
    deepest = []
    for t in range(trials):
        points = rollout(sampler, horizon, stream=stream_base + t)
        worst = 0
        for x in points:
            k = _first_ball_index(space, delta, x, COVER_INDEX_CAP)
            if k > worst:
                worst = k
            if worst > COVER_INDEX_CAP:
                break
        deepest.append(worst)

    deepest_sorted = sorted(deepest, reverse=True)
    # escape count at M is #{trials with deepest > M}; the bound is monotone
    # in the count, so the largest admissible count fixes the quantile
    allowed = 0
    while allowed < trials and binomial_upper(allowed + 1, trials) < epsilon:
        allowed += 1
    candidate = min_count if allowed >= trials else max(min_count, deepest_sorted[allowed])
    if candidate > COVER_INDEX_CAP:
        raise HorizonInsufficientError(
            f"no cover prefix up to {COVER_INDEX_CAP} cells certifies escape < {epsilon}"
        )
    return candidate, greedy_cover(space, delta, candidate)

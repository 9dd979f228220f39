"""Randomized countable measurable partitions of the unit interval and of
general spaces via covers, with schedule estimation and Monte-Carlo checks.

Construction sketch (unit-interval form).  Level k owns a mass budget of
2**-(k+1) split into ceil(mass / width) random closed intervals of width
width_k centered at fresh uniforms; the level set is their union.  The
remainder at depth k is the union of all level sets at depth >= k, and the
partition cell of a point is the deepest level set containing it (0 when
it misses every level, a tail cell when it sits in level sets infinitely
often).  Truncation at k_max means tail membership can only be flagged,
never decided, so queries inside the deepest level report
"tail-undetermined".

Schedule constants are distributional properties of the process: the
level-k probe horizon must see more than (1/mass_k)**2 distinct values
with probability 1 - 2**-(k+1), and the width must undercut the minimum
pairwise gap at that horizon with the same probability.  Both are
estimated by seeded Monte Carlo with one-sided 0.99 confidence
corrections (deterministic processes take the exact path).

Widths are kept as exact Fractions: for fast-decaying processes the
estimated widths fall below float resolution while the mass budget per
level stays fixed, which also makes the interval count per level too
large to materialize.  Checks that only need hit/miss events against a
known point set therefore use an exact distributional reduction: the
number of interval centers landing in a measurable union U of known
measure is Binomial(count, |U|), so the hit indicator can be sampled
without realizing the centers.  The reduction is validated against the
materialized simulation at small scale in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    CoverTooSmallError,
    FiniteSupportProcessError,
    HorizonInsufficientError,
    HypothesisViolatedError,
    ScheduleTooDenseError,
)
from .processes import rollout, rollout_info
from .seeding import rng
from .stats import binomial_lower, binomial_upper

TAIL_UNDETERMINED = "tail-undetermined"
MATERIALIZE_CAP = 2**23  # max intervals build_unit_interval will realize
MC_DRAW_CAP = 2**28  # max uniforms a materialized Monte-Carlo check may draw
INT64_MAX = 2**62


def level_mass(depth: int) -> Fraction:
    """Mass budget of level k: exactly 2**-(k+1)."""
    return Fraction(1, 2 ** (depth + 1))


@dataclass(frozen=True)
class ScheduleLevel:
    depth: int  # k >= 1
    horizon: int  # probe horizon for the distinct-count event
    width: Fraction  # interval width, 0 < width < mass

    @property
    def mass(self) -> Fraction:
        return level_mass(self.depth)

    @property
    def interval_count(self) -> int:
        return -((-self.mass) // self.width)  # ceil(mass / width), exact


@dataclass(frozen=True)
class PartitionSchedule:
    levels: tuple

    def __post_init__(self):
        for i, lvl in enumerate(self.levels, start=1):
            if lvl.depth != i:
                raise ValueError("levels must be numbered 1..k_max in order")
            if not 0 < lvl.width < lvl.mass:
                raise ValueError(
                    f"level {i}: width must lie in (0, 2**-(k+1)), got {lvl.width}"
                )
            if lvl.horizon < 1:
                raise ValueError("probe horizons must be >= 1")

    @property
    def k_max(self) -> int:
        return len(self.levels)

    def level(self, depth: int) -> ScheduleLevel:
        return self.levels[depth - 1]

    def index_range(self, depth: int) -> tuple:
        """Half-open center-index block (i_{k-1}, i_k] owned by the level."""
        below = sum(l.interval_count for l in self.levels[: depth - 1])
        return below, below + self.level(depth).interval_count

    @property
    def total_intervals(self) -> int:
        return sum(l.interval_count for l in self.levels)


def make_schedule(widths, horizons=None) -> PartitionSchedule:
    """Schedule from explicit widths (floats or Fractions), mostly for tests."""
    levels = []
    for i, w in enumerate(widths, start=1):
        h = 1 if horizons is None else horizons[i - 1]
        levels.append(ScheduleLevel(i, h, Fraction(w)))
    return PartitionSchedule(tuple(levels))


# --- schedule estimation ---


def _distinct_count_matrix(points: np.ndarray) -> np.ndarray:
    """Cumulative distinct counts along each row of a float matrix."""
    order = np.argsort(points, axis=1, kind="stable")
    ranked = np.take_along_axis(points, order, axis=1)
    fresh_ranked = np.ones(points.shape, dtype=bool)
    fresh_ranked[:, 1:] = ranked[:, 1:] != ranked[:, :-1]
    fresh = np.empty(points.shape, dtype=bool)
    np.put_along_axis(fresh, order, fresh_ranked, axis=1)
    return np.cumsum(fresh, axis=1)


def _min_gap_rows(points: np.ndarray) -> np.ndarray:
    """Minimum positive adjacent gap per row (inf if fewer than 2 distinct)."""
    ranked = np.sort(points, axis=1)
    gaps = np.diff(ranked, axis=1)
    gaps[gaps == 0.0] = np.inf
    if gaps.shape[1] == 0:
        return np.full(points.shape[0], np.inf)
    return gaps.min(axis=1)


def _quantile_index(n: int, confidence_target: float) -> int:
    """Smallest order-statistic rank whose 0.99 lower bound clears the target."""
    for j in range(math.ceil(confidence_target * n), n + 1):
        if binomial_lower(j, n) >= confidence_target:
            return j
    raise ValueError(
        f"{n} trials cannot certify probability {confidence_target} at 0.99 confidence"
    )


def _clamped_width(gap, depth: int) -> Fraction:
    mass = level_mass(depth)
    if gap == math.inf:
        return mass / 2
    width = Fraction(gap) / 2
    return width if width < mass else mass / 2


def estimate_schedule(
    sampler,
    k_max: int,
    trials: int,
    stream_base: int = 0,
    horizon_cap: int | None = None,
) -> PartitionSchedule:
    """Estimate per-level probe horizons and interval widths for a process.

    Level k needs the smallest horizon at which the process shows more than
    (2**(k+1))**2 distinct values with conditional probability at least
    1 - 2**-(k+1) (certified by a 0.99 lower confidence bound), and a width
    equal to half the empirical lower-quantile minimum gap at that horizon,
    clamped below 2**-(k+1).  Mixed samplers are conditioned on their
    infinite branch; certainly-finite samplers are rejected.
    """
    if sampler.support_class == "certainly-finite":
        raise FiniteSupportProcessError(
            "schedule is undefined for a certainly-finite process"
        )
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    top_target = 4 ** (k_max + 1)
    cap = horizon_cap if horizon_cap is not None else 16 * top_target

    if sampler.deterministic:
        return _estimate_deterministic(sampler, k_max, cap)

    if trials < 2:
        raise ValueError("stochastic schedule estimation needs trials >= 2")

    horizon = top_target
    while True:
        rows = _collect_infinite_rollouts(sampler, horizon, trials, stream_base)
        counts = _distinct_count_matrix(rows)
        levels = []
        retry = False
        for k in range(1, k_max + 1):
            target = 4 ** (k + 1)
            confidence_target = 1.0 - 2.0 ** -(k + 1)
            rank = _quantile_index(trials, confidence_target)
            reach = counts[:, -1] >= target
            first = np.where(reach, np.argmax(counts >= target, axis=1) + 1, horizon + 1)
            n_k = int(np.partition(first, rank - 1)[rank - 1])
            if n_k > horizon:
                retry = True
                break
            gap_rank = max(1, int(2.0 ** -(k + 1) * trials))
            gaps = _min_gap_rows(rows[:, :n_k])
            gap = float(np.partition(gaps, gap_rank - 1)[gap_rank - 1])
            levels.append(ScheduleLevel(k, n_k, _clamped_width(gap, k)))
        if not retry:
            return PartitionSchedule(tuple(levels))
        if horizon >= cap:
            raise HorizonInsufficientError(
                f"distinct-count target not certified within horizon cap {cap}"
            )
        horizon = min(cap, horizon * 2)


def _estimate_deterministic(sampler, k_max: int, cap: int) -> PartitionSchedule:
    from .processes import distinct_counts, prefix_stats

    horizon = 4 ** (k_max + 1)
    while True:
        points = rollout(sampler, horizon)
        counts = distinct_counts(points)
        if counts[-1] >= 4 ** (k_max + 1):
            break
        if horizon >= cap:
            raise HorizonInsufficientError(
                f"deterministic process shows too few distinct values within {cap}"
            )
        horizon = min(cap, horizon * 2)
    levels = []
    for k in range(1, k_max + 1):
        target = 4 ** (k + 1)
        n_k = int(np.argmax(counts >= target)) + 1
        gap = prefix_stats(points[:n_k]).min_gap
        levels.append(ScheduleLevel(k, n_k, _clamped_width(gap, k)))
    return PartitionSchedule(tuple(levels))


def _collect_infinite_rollouts(sampler, horizon, trials, stream_base) -> np.ndarray:
    """Rollout matrix conditioned on the infinite branch for mixed samplers."""
    if sampler.support_class != "mixed":
        rows = [
            np.asarray(rollout(sampler, horizon, stream=stream_base + t), dtype=float)
            for t in range(trials)
        ]
        return np.stack(rows)
    rows = []
    attempts = 0
    stream = stream_base
    while len(rows) < trials:
        if attempts >= 50 * trials:
            raise ValueError("mixed sampler yielded too few infinite-branch rollouts")
        info = rollout_info(sampler, horizon, stream=stream)
        if info.infinite_branch:
            rows.append(np.asarray(info.points, dtype=float))
        stream += 1
        attempts += 1
    return np.stack(rows)


# --- exact merged measure of a width-neighborhood ---


def _merged_measure_float(points: np.ndarray, width: float) -> float:
    """Float merged measure of the width-neighborhood, clipped to [0, 1].

    Used only as a simulation parameter; the exact Fraction variant below
    backs every measure assertion.
    """
    distinct = np.unique(points)
    half = width / 2
    lo = np.maximum(distinct - half, 0.0)
    hi = np.minimum(distinct + half, 1.0)
    if len(distinct) == 1:
        return float(max(hi[0] - lo[0], 0.0))
    first = max(hi[0] - lo[0], 0.0)
    starts = np.maximum(lo[1:], hi[:-1])
    return float(first + np.maximum(hi[1:] - starts, 0.0).sum())


def merged_neighborhood_measure(points, width: Fraction, lo=0, hi=1) -> Fraction:
    """Exact Lebesgue measure of union of [x - width/2, x + width/2] clipped.

    Points may be floats or Fractions; conversion to Fraction is exact.
    """
    half = Fraction(width) / 2
    lo_f, hi_f = Fraction(lo), Fraction(hi)
    total = Fraction(0)
    cur_lo = cur_hi = None
    for x in sorted(set(points)):
        xf = Fraction(x)
        a, b = max(lo_f, xf - half), min(hi_f, xf + half)
        if a > b:
            continue
        if cur_hi is None:
            cur_lo, cur_hi = a, b
        elif a > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = a, b
        else:
            cur_hi = max(cur_hi, b)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


# --- the realized partition ---


class RandomPartition:
    """Truncated realization of the countable random partition.

    Unit-interval form realizes the uniform interval centers; general form
    realizes uniformly sampled cover cells per level.  Immutable once
    built; membership queries are pure.
    """

    def __init__(self, form, k_max, schedule=None, centers=None, covers=None, cell_ids=None, seed=None):
        self.form = form
        self.k_max = k_max
        self.schedule = schedule
        self.centers = centers
        self.covers = covers
        self.cell_ids = cell_ids
        self.seed = seed
        if form == "general-cover":
            self._id_sets = [set(ids.tolist()) for ids in cell_ids]

    # membership

    def level_centers(self, depth: int) -> np.ndarray:
        lo, hi = self.schedule.index_range(depth)
        return self.centers[lo:hi]

    def in_level(self, x, depth: int) -> bool:
        """Whether x lies in the level-`depth` set of the realization."""
        if self.form == "unit-interval":
            half = float(self.schedule.level(depth).width) / 2
            centers = self.level_centers(depth)
            return bool(np.any(np.abs(centers - x) <= half))
        cell = self.covers[depth - 1].cell_of(x)
        return cell is not None and cell in self._id_sets[depth - 1]

    def cell_index(self, x):
        """Deepest level set containing x; 0 if none; tail flag at k_max.

        Membership in the deepest materialized level leaves the true cell
        undecidable under truncation, hence "tail-undetermined".
        """
        deepest = 0
        for k in range(self.k_max, 0, -1):
            if self.in_level(x, k):
                deepest = k
                break
        if deepest == self.k_max:
            return TAIL_UNDETERMINED
        return deepest

    def visited_cells(self, prefix):
        """Resolved cell indices of a prefix plus per-level hit flags."""
        flags = {k: False for k in range(1, self.k_max + 1)}
        cells = set()
        for x in prefix:
            for k in range(1, self.k_max + 1):
                if not flags[k] and self.in_level(x, k):
                    flags[k] = True
            cells.add(self.cell_index(x))
        cells.discard(TAIL_UNDETERMINED)
        return cells, flags

    # unit-interval specific views

    def intervals(self, depth: int):
        """Realized closed intervals of a level, clipped to [0, 1]."""
        if self.form != "unit-interval":
            raise ValueError("intervals are only defined for the unit-interval form")
        half = float(self.schedule.level(depth).width) / 2
        return [
            (max(0.0, float(c) - half), min(1.0, float(c) + half))
            for c in self.level_centers(depth)
        ]

    def level_measure(self, depth: int) -> Fraction:
        """Exact merged measure of the level set."""
        if self.form != "unit-interval":
            raise ValueError("exact measure is only computed for the unit-interval form")
        width = self.schedule.level(depth).width
        return merged_neighborhood_measure(self.level_centers(depth).tolist(), width)

    def to_text(self) -> str:
        """Flat text: one line per level with depth, width, interval endpoints."""
        if self.form != "unit-interval":
            raise ValueError("text serialization covers the unit-interval form only")
        lines = []
        for k in range(1, self.k_max + 1):
            parts = [str(k), f"{float(self.schedule.level(k).width):.17g}"]
            for lo, hi in self.intervals(k):
                parts.append(f"{lo:.17g}")
                parts.append(f"{hi:.17g}")
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"


def build_unit_interval(schedule: PartitionSchedule, seed: int) -> RandomPartition:
    """Realize the unit-interval partition: fresh uniforms for every center."""
    total = schedule.total_intervals
    if total > MATERIALIZE_CAP:
        raise ScheduleTooDenseError(
            f"schedule needs {total} intervals; cap is {MATERIALIZE_CAP}. "
            "Use the reduced Monte-Carlo checks instead of materializing."
        )
    centers = rng(seed, "centers").random(total)
    return RandomPartition(
        "unit-interval", schedule.k_max, schedule=schedule, centers=centers, seed=seed
    )


def partition_from_centers(schedule: PartitionSchedule, centers) -> RandomPartition:
    """Partition with explicitly supplied centers (deterministic variants)."""
    centers = np.asarray(centers, dtype=float)
    if len(centers) != schedule.total_intervals:
        raise ValueError("need exactly one center per scheduled interval")
    return RandomPartition(
        "unit-interval", schedule.k_max, schedule=schedule, centers=centers
    )


def build_general(covers, seed: int) -> RandomPartition:
    """General-space partition: level k keeps ceil(2**-(k+2) * M) sampled cells.

    covers is a sequence of (Cover, M) pairs, one per level, each from the
    greedy cover machinery with M >= 2**(k+2) cells.
    """
    cell_ids = []
    for k, (cover, m_cells) in enumerate(covers, start=1):
        if m_cells < 2 ** (k + 2):
            raise CoverTooSmallError(
                f"level {k} needs a cover of at least {2 ** (k + 2)} cells, got {m_cells}"
            )
        if len(cover) < m_cells:
            raise CoverTooSmallError(
                f"level {k}: cover materializes {len(cover)} cells, claimed {m_cells}"
            )
        draw = -((-m_cells) // 2 ** (k + 2))  # ceil(2**-(k+2) * M)
        if draw * 2 ** (k + 1) > m_cells:
            raise CoverTooSmallError(
                f"level {k}: sampled cells would exceed 2**-(k+1) of the cover"
            )
        ids = rng(seed, "cells", k).integers(1, m_cells + 1, size=draw)
        cell_ids.append(ids)
    return RandomPartition(
        "general-cover",
        len(cell_ids),
        covers=[c for c, _ in covers],
        cell_ids=cell_ids,
        seed=seed,
    )


def cell_index(partition: RandomPartition, x):
    return partition.cell_index(x)


def visited_cells(partition: RandomPartition, prefix):
    return partition.visited_cells(prefix)


# --- Monte-Carlo checks ---


@dataclass(frozen=True)
class MissReport:
    depth: int
    trials: int
    misses: int
    frequency: float
    upper: float
    analytic_bound: float


def mc_check_lemma1(
    schedule: PartitionSchedule, depth: int, probe_set, trials: int, seed: int
) -> MissReport:
    """Redraw one level's centers and count trials missing the probe set.

    The probe set must have more than (2**(depth+1))**2 points with all
    pairwise gaps strictly above the level width; the analytic miss bound
    is then exp(-2**(depth+1)).
    """
    level = schedule.level(depth)
    points = sorted(probe_set)
    if len(points) <= (2 ** (depth + 1)) ** 2:
        raise HypothesisViolatedError(
            f"probe set needs more than {(2 ** (depth + 1)) ** 2} points, got {len(points)}"
        )
    for a, b in zip(points, points[1:]):
        if Fraction(b) - Fraction(a) <= level.width:
            raise HypothesisViolatedError("probe set has a pairwise gap at or below the width")
    count = level.interval_count
    if count * trials > MC_DRAW_CAP:
        raise ScheduleTooDenseError(
            f"materialized check would draw {count * trials} uniforms; cap {MC_DRAW_CAP}"
        )
    half = float(level.width) / 2
    pts = np.asarray(points, dtype=float)
    draws = rng(seed, "lemma1", depth).random((trials, count))
    pos = np.searchsorted(pts, draws)
    left = np.abs(draws - pts[np.maximum(pos - 1, 0)])
    right = np.abs(pts[np.minimum(pos, len(pts) - 1)] - draws)
    near = np.minimum(left, right) <= half
    misses = int(np.count_nonzero(~near.any(axis=1)))
    return MissReport(
        depth,
        trials,
        misses,
        misses / trials,
        binomial_upper(misses, trials),
        math.exp(-(2 ** (depth + 1))),
    )


@dataclass(frozen=True)
class TailRow:
    point: float
    depth: int
    trials: int
    hits: int
    frequency: float
    upper: float
    bound: float  # 2**-(depth-1)


def mc_check_tail(schedule: PartitionSchedule, points, trials: int, seed: int) -> list:
    """Per-point frequencies of landing in the truncated remainder at each depth.

    The remainder at depth k is the union of level sets k..k_max; each
    single level traps a fixed point with probability at most mass + width,
    so the remainder frequency must sit below 2**-(k-1).
    """
    if trials == 0:
        return []
    k_max = schedule.k_max
    total = schedule.total_intervals
    if total * trials > MC_DRAW_CAP:
        raise ScheduleTooDenseError(
            f"materialized check would draw {total * trials} uniforms; cap {MC_DRAW_CAP}"
        )
    pts = np.asarray(list(points), dtype=float)
    member = np.zeros((k_max, trials, len(pts)), dtype=bool)
    for k in range(1, k_max + 1):
        level = schedule.level(k)
        half = float(level.width) / 2
        draws = rng(seed, "tail", k).random((trials, level.interval_count))
        dist = np.abs(draws[:, :, None] - pts[None, None, :])
        member[k - 1] = (dist <= half).any(axis=1)
    rows = []
    for i, x in enumerate(pts.tolist()):
        for k in range(1, k_max + 1):
            in_remainder = member[k - 1 :, :, i].any(axis=0)
            hits = int(np.count_nonzero(in_remainder))
            rows.append(
                TailRow(
                    x,
                    k,
                    trials,
                    hits,
                    hits / trials,
                    binomial_upper(hits, trials),
                    2.0 ** -(k - 1),
                )
            )
    return rows


@dataclass(frozen=True)
class FmvRow:
    depth: int
    horizon: int
    trials: int
    hits: int
    frequency: float
    lower: float
    analytic_floor: float  # 1 - (2**-k + exp(-2**(k+1)))


def mc_check_fmv(
    schedule: PartitionSchedule,
    sampler,
    trials: int,
    seed: int,
    levels=None,
) -> list:
    """Paired redraws of process and level set; hit frequency per level.

    Per trial the process prefix at the level's probe horizon defines a
    neighborhood union of exactly known measure; the number of fresh
    centers landing in it is Binomial(interval_count, measure), sampled
    directly (the indicator depends on the centers only through this
    count).  Levels whose interval counts exceed int64 fall back to the
    exact Bernoulli hit probability computed from the same reduction.
    """
    rows = []
    depths = list(levels) if levels is not None else list(range(1, schedule.k_max + 1))
    for k in depths:
        level = schedule.level(k)
        count = level.interval_count
        gen = rng(seed, "fmv", k)
        cached_measure = None
        hits = 0
        for t in range(trials):
            if sampler.deterministic:
                if cached_measure is None:
                    pts = rollout(sampler, level.horizon)
                    cached_measure = merged_neighborhood_measure(pts, level.width)
                measure = cached_measure
            else:
                pts = _infinite_rollout(sampler, level.horizon, stream=k * trials + t)
                pts = np.asarray(pts, dtype=float)
                measure = _merged_measure_float(pts, float(level.width))
            hits += _hit_indicator(gen, count, measure)
        rows.append(
            FmvRow(
                k,
                level.horizon,
                trials,
                hits,
                hits / trials,
                binomial_lower(hits, trials),
                1.0 - (2.0 ** -k + math.exp(-(2 ** (k + 1)))),
            )
        )
    return rows


def _infinite_rollout(sampler, horizon, stream):
    if sampler.support_class != "mixed":
        return rollout(sampler, horizon, stream=stream)
    offset = 0
    while True:
        info = rollout_info(sampler, horizon, stream=stream + offset * 1_000_003)
        if info.infinite_branch:
            return info.points
        offset += 1


def _hit_indicator(gen, count: int, measure) -> int:
    """1 iff any of `count` fresh uniform centers lands in a set of `measure`.

    Exact in distribution: the count of centers inside the set is
    Binomial(count, measure), sampled directly while count and measure sit
    comfortably inside double precision.  Beyond that, P(no center hits)
    equals (1 - measure)**count; its exponent count*measure is computed
    exactly (Fraction) and the dropped series tail is below
    count*measure**2, astronomically small for every schedule that reaches
    this branch.
    """
    if measure <= 0:
        return 0
    if measure >= 1:
        return 1
    p = float(measure)
    if count <= 2**40 and p >= 2.0**-40:
        return 1 if gen.binomial(count, p) >= 1 else 0
    exponent = count * measure if isinstance(measure, Fraction) else count * Fraction(measure)
    p_hit = -math.expm1(-float(exponent))
    return 1 if gen.random() < p_hit else 0

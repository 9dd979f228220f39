"""Constructive adversaries.

Two constructions live here.  The piecewise-random target takes any cell
family the process keeps visiting, estimates a high-probability deadline
for each cell's first visit, and assigns each cell a coin flip between
two values whose loss gap scales with that deadline; whatever a learner
predicts at a first visit, the expected loss is at least the deadline,
so the running average at that round stays bounded away from zero.  The
fooling loop drives any would-be consistency test for the finite-support
property through an alternating constant/novel process on which its
decisions oscillate forever.

Cell families are duck-typed: anything with `cell_index(x)` and `k_max`
works, including realized random partitions (whose "tail-undetermined"
answers are mapped to the deepest materialized cell, a truncation bias
that only weakens the adversary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import HorizonInsufficientError, TestNonconvergentError
from .learners import make_rule
from .losses import LossModel, witness_pair
from .partitions import TAIL_UNDETERMINED
from .processes import rollout
from .seeding import rng
from .stats import aggregate, binomial_lower, binomial_upper


@dataclass(frozen=True)
class DyadicCellFamily:
    """Explicit partition of [0, 1]: cell k is (2**-(k+1), 2**-k], else cell 0.

    The dyadic decay process enters cell k at round k exactly, which makes
    first-visit times deterministic.
    """

    k_max: int

    def cell_index(self, x) -> int:
        if x <= 0 or x > 1:
            return 0
        for k in range(1, self.k_max + 1):
            if Fraction(1, 2 ** (k + 1)) < x <= Fraction(1, 2 ** k):
                return k
        return 0


@dataclass(frozen=True)
class IntervalCellFamily:
    """Cells from an explicit list of disjoint intervals; cell 0 is the rest."""

    intervals: tuple  # ((lo, hi, closed_right?) simplified to half-open [lo, hi))

    @property
    def k_max(self) -> int:
        return len(self.intervals)

    def cell_index(self, x) -> int:
        for k, (lo, hi) in enumerate(self.intervals, start=1):
            if lo <= x < hi:
                return k
        return 0


def _resolved_cell(family, x) -> int:
    cell = family.cell_index(x)
    if cell == TAIL_UNDETERMINED:
        return family.k_max  # deepest materialized cell; truncation bias
    return cell


@dataclass(frozen=True)
class FirstVisitThresholds:
    """Per-cell deadlines T_k with P(first visit <= T_k) > 1 - 2**-k."""

    deadlines: dict  # depth -> int
    unreachable: tuple  # depths never visited within the probe horizon
    horizon: int
    trials: int


def estimate_first_visit_thresholds(
    sampler, family, k_max: int, trials: int, horizon: int, seed: int = 0
) -> FirstVisitThresholds:
    """Empirical (1 - 2**-k)-quantiles of first-visit times, 0.99-corrected.

    Cells never hit within the horizon are reported unreachable; if more
    than half of the cells 1..k_max are unreachable the probe horizon is
    deemed insufficient.
    """
    first_visits = {k: [] for k in range(1, k_max + 1)}
    effective_trials = 1 if sampler.deterministic else trials
    for t in range(effective_trials):
        points = rollout(sampler, horizon, stream=t)
        seen = {}
        for i, x in enumerate(points):
            cell = _resolved_cell(family, x)
            if 1 <= cell <= k_max and cell not in seen:
                seen[cell] = i + 1
                if len(seen) == k_max:
                    break
        for k in range(1, k_max + 1):
            first_visits[k].append(seen.get(k, math.inf))

    deadlines = {}
    unreachable = []
    for k in range(1, k_max + 1):
        visits = sorted(first_visits[k])
        if sampler.deterministic:
            deadline = visits[0]  # exact: every rollout is identical
        else:
            deadline = _certified_quantile(visits, 1.0 - 2.0 ** -k)
        if deadline == math.inf or deadline is None:
            unreachable.append(k)
        else:
            deadlines[k] = int(deadline)
    if len(unreachable) > k_max / 2:
        raise HorizonInsufficientError(
            f"{len(unreachable)} of {k_max} cells were never visited within {horizon}"
        )
    return FirstVisitThresholds(deadlines, tuple(unreachable), horizon, effective_trials)


def _certified_quantile(ordered, target: float):
    """Smallest order statistic whose 0.99 lower confidence bound clears target."""
    n = len(ordered)
    start = math.ceil(target * n)
    for j in range(max(1, start), n + 1):
        if binomial_lower(j, n) >= target:
            return ordered[j - 1]
    return None


@dataclass(frozen=True)
class AdversarialTarget:
    """Cell-constant target with a fair coin between a far-apart value pair.

    Pair k satisfies loss(pair[0], pair[1]) >= 2 * c_relaxed * deadline_k,
    so any prediction loses at least deadline_k in expectation when the
    cell is first visited.
    """

    family: object
    pairs: dict  # depth -> (value, value)
    coins: dict  # depth -> 0 or 1
    loss: LossModel

    def __call__(self, x):
        cell = _resolved_cell(self.family, x)
        pair = self.pairs.get(cell)
        if pair is None:
            return self.pairs[0][0] if 0 in self.pairs else 0.0
        return pair[self.coins[cell]]

    def sample_labels(self, xs, generator=None):
        return np.array([self(x) for x in xs], dtype=float)

    noisy = False


def sample_adversarial_target(
    family, thresholds: FirstVisitThresholds, loss: LossModel, seed: int
) -> AdversarialTarget:
    """Draw the per-cell coins and materialize the loss-gap pairs."""
    pairs = {0: witness_pair(loss, 0.0)}
    coins = {0: 0}
    gen = rng(seed, "coins")
    k_max = family.k_max
    for k in range(1, k_max + 1):
        deadline = thresholds.deadlines.get(k, 0)
        pair = witness_pair(loss, 2.0 * loss.c_relaxed * deadline)
        if loss.evaluate(*pair) < 2.0 * loss.c_relaxed * deadline:
            raise AssertionError("witness pair failed its loss-gap requirement")
        pairs[k] = pair
        coins[k] = int(gen.integers(0, 2))
    return AdversarialTarget(family, pairs, coins, loss)


@dataclass(frozen=True)
class DefeatRow:
    depth: int
    deadline: int
    runs_observed: int
    mean_first_visit_loss: float
    loss_lower_bound: float
    mean_running_average: float


def evaluate_defeat(
    rule_factory,
    sampler,
    family,
    thresholds: FirstVisitThresholds,
    loss: LossModel,
    runs: int,
    horizon: int,
    seed: int = 0,
) -> list:
    """Mean loss at each cell's first visit across runs with fresh coins.

    rule_factory(target) must return a fresh rule per run; built-in rules
    ignore the target, the oracle baseline peeks at it.  Row means are to
    be compared against the deadlines T_k.
    """
    per_level_losses = {k: [] for k in thresholds.deadlines}
    per_level_running = {k: [] for k in thresholds.deadlines}
    for run in range(runs):
        target = sample_adversarial_target(family, thresholds, loss, seed=seed * 1_000_003 + run)
        rule = rule_factory(target)
        points = rollout(sampler, horizon, stream=run)
        fn = loss.fn
        predict = rule.predict
        observe = rule.observe
        losses = np.empty(len(points))
        seen = set()
        firsts = {}
        for i, x in enumerate(points):
            y = target(x)
            losses[i] = fn(predict(x), y)
            observe(x, y)
            cell = _resolved_cell(family, x)
            if cell in per_level_losses and cell not in seen:
                seen.add(cell)
                firsts[cell] = i
        csum = np.cumsum(losses)
        for k, i in firsts.items():
            per_level_losses[k].append(float(losses[i]))
            per_level_running[k].append(float(csum[i]) / (i + 1))
    rows = []
    for k in sorted(per_level_losses):
        obs = per_level_losses[k]
        if not obs:
            continue
        summary = aggregate(obs, "mean")
        running = aggregate(per_level_running[k], "mean")
        rows.append(
            DefeatRow(
                k,
                thresholds.deadlines[k],
                len(obs),
                summary.estimate,
                summary.lower,
                running.estimate,
            )
        )
    return rows


def memorization_factory(loss: LossModel):
    return lambda target: make_rule("memorization", loss)


class OracleRule:
    """Baseline with oracle access to the sampled target; never loses."""

    kind = "oracle"

    def __init__(self, target):
        self.target = target

    def predict(self, x):
        return self.target(x)

    def observe(self, x, y):
        pass

    def supports_bulk(self) -> bool:
        return False


# --- fooling any hypothesis test for the finite-support property ---


@dataclass(frozen=True)
class SwitchRecord:
    index: int  # n_k, the certified round
    mode: str  # "constant" | "novel"
    frequency: float  # empirical P(test outputs 1) at n_k
    lower: float
    upper: float


@dataclass(frozen=True)
class FoolingTranscript:
    switches: tuple  # SwitchRecord per certified switch
    prefix: tuple  # the committed process through the last switch
    replays: int

    @property
    def switch_indices(self) -> tuple:
        return tuple(s.index for s in self.switches)


def half_window_novelty_test(prefix, generator=None) -> int:
    """Built-in test: 1 iff no novel value appeared in the last ceil(n/2) rounds."""
    n = len(prefix)
    window = n - math.ceil(n / 2)  # novel index > window  -> output 0
    seen = set()
    last_novel = 0
    for i, x in enumerate(prefix, start=1):
        if x not in seen:
            seen.add(x)
            last_novel = i
    return 1 if last_novel <= window else 0


def fool_hypothesis_test(
    test,
    distinct_points,
    confidence_trials: int,
    max_switches: int = 4,
    search_cap: int = 4096,
    seed: int = 0,
    anchor=None,
) -> FoolingTranscript:
    """Alternate constant and novel segments so the test's answers oscillate.

    Even segments extend the prefix with the constant anchor until the test
    says "finitely many values" with certified frequency above 3/4; odd
    segments append fresh points of the distinct enumeration until it says
    the opposite with frequency below 1/4.  Certification uses one-sided
    0.99 binomial bounds over `confidence_trials` fresh replays on the
    frozen prefix (randomness lives in the test alone).  A segment that
    cannot be certified within the search cap raises TestNonconvergentError,
    which is the honest outcome for tests that do not converge.
    """
    if anchor is None:
        anchor = distinct_points(1)
    prefix = []
    switches = []
    for segment in range(max_switches):
        constant_mode = segment % 2 == 0
        start = len(prefix)
        certified = None
        for n in range(start + 1, search_cap + 1):
            t = len(prefix) + 1
            prefix.append(anchor if constant_mode else distinct_points(t + 1))
            # cheap probe first; full certification only when it looks right
            probe = test(prefix, rng(seed, "probe", segment, n))
            if probe != (1 if constant_mode else 0):
                continue
            outputs = [
                test(prefix, rng(seed, "replay", segment, n, r))
                for r in range(confidence_trials)
            ]
            ones = int(sum(outputs))
            if constant_mode and binomial_lower(ones, confidence_trials) > 0.75:
                certified = SwitchRecord(
                    n,
                    "constant",
                    ones / confidence_trials,
                    binomial_lower(ones, confidence_trials),
                    binomial_upper(ones, confidence_trials),
                )
                break
            if not constant_mode and binomial_upper(ones, confidence_trials) < 0.25:
                certified = SwitchRecord(
                    n,
                    "novel",
                    ones / confidence_trials,
                    binomial_lower(ones, confidence_trials),
                    binomial_upper(ones, confidence_trials),
                )
                break
        if certified is None:
            raise TestNonconvergentError(
                f"segment {segment} ({'constant' if constant_mode else 'novel'}) "
                f"not certified within {search_cap} rounds"
            )
        switches.append(certified)
    return FoolingTranscript(tuple(switches), tuple(prefix), confidence_trials)

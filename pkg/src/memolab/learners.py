"""Online learning rules and the three evaluation protocols.

Rules share a two-method interface: predict(x) is pure, observe(x, y)
folds one labeled pair into the state.  The online protocol always
predicts before observing.  Table-based rules additionally expose an
exact vectorized bulk runner used when a run starts from a fresh rule on
numeric data; it is bit-for-bit equivalent to the generic loop (the test
suite enforces this), just faster.

Lookup is exact value equality, matching the generators' exactly
representable points.  Memorization keeps the first label seen per
instance; the Frechet memorizer keeps the full label multiset through a
streaming accumulator and predicts its Frechet sample mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .frechet import accumulator_factory
from .losses import LossModel, default_value
from .processes import rollout
from .seeding import rng


class MemorizationRule:
    """Predict the stored label on an exact instance match, else the default."""

    kind = "memorization"

    def __init__(self, default=0.0):
        self.table = {}
        self.default = default

    def predict(self, x):
        return self.table.get(x, self.default)

    def observe(self, x, y):
        if x not in self.table:  # first label wins; realizable data never conflicts
            self.table[x] = y

    def supports_bulk(self) -> bool:
        return not self.table

    def run_pairs(self, xs: np.ndarray, ys: np.ndarray, loss: LossModel) -> np.ndarray:
        """Vectorized online pass from an empty table (exact equality path)."""
        uniq, first_idx = np.unique(xs, return_index=True)
        order = np.searchsorted(uniq, xs)
        stored = ys[first_idx]
        positions = np.arange(len(xs))
        predicted = np.where(first_idx[order] == positions, self.default, stored[order])
        losses = loss.vector_fn(predicted, ys)
        for v, i in zip(uniq.tolist(), first_idx.tolist()):
            self.table[v] = float(ys[i])
        return losses


class FrechetMemorizerRule:
    """Predict the Frechet sample mean of the labels recorded at the instance."""

    kind = "frechet-memorizer"

    def __init__(self, loss: LossModel, default=None):
        self.loss = loss
        self.default = default_value(loss) if default is None else default
        self.cells = {}
        self._factory = accumulator_factory(loss)

    def predict(self, x):
        acc = self.cells.get(x)
        return self.default if acc is None else acc.value

    def observe(self, x, y):
        acc = self.cells.get(x)
        if acc is None:
            acc = self._factory()
            self.cells[x] = acc
        acc.add(y)

    def supports_bulk(self) -> bool:
        # bulk path covers the p=2 real case (running means); others loop
        return not self.cells and self.loss.kind == "squared" and self.loss.value_space == "real"

    def run_pairs(self, xs: np.ndarray, ys: np.ndarray, loss: LossModel) -> np.ndarray:
        """Vectorized online pass from an empty state (p=2 real labels).

        Per-group cumulative sums reproduce the accumulator's left-to-right
        addition order exactly, so this matches the generic loop bitwise.
        """
        n = len(xs)
        uniq, inverse = np.unique(xs, return_inverse=True)
        order = np.argsort(inverse, kind="stable")  # groups, time order inside
        grouped_y = ys[order]
        group_ids = inverse[order]
        starts = np.concatenate([[0], np.flatnonzero(np.diff(group_ids)) + 1, [n]])
        predicted_sorted = np.empty(n)
        for gi in range(len(starts) - 1):
            s, e = int(starts[gi]), int(starts[gi + 1])
            csum = np.cumsum(grouped_y[s:e])
            predicted_sorted[s] = self.default
            if e - s > 1:
                predicted_sorted[s + 1 : e] = csum[:-1] / np.arange(1, e - s)
            acc = self._factory()
            acc.count = e - s
            acc.total = float(csum[-1])
            self.cells[float(uniq[gi])] = acc
        losses = np.empty(n)
        losses[order] = loss.vector_fn(predicted_sorted, grouped_y)
        return losses


class NearestNeighborRule:
    """Predict the label of the closest stored instance; ties go to the
    earliest insertion."""

    kind = "nearest-neighbor"

    def __init__(self, default=0.0, distance: Callable = None):
        self.default = default
        self.distance = distance if distance is not None else _abs_distance
        self.instances = []
        self.labels = []

    def predict(self, x):
        if not self.instances:
            return self.default
        dist = self.distance
        best = 0
        best_d = dist(x, self.instances[0])
        for i in range(1, len(self.instances)):
            d = dist(x, self.instances[i])
            if d < best_d:
                best, best_d = i, d
        return self.labels[best]

    def observe(self, x, y):
        self.instances.append(x)
        self.labels.append(y)

    def supports_bulk(self) -> bool:
        return False


class ConstantDefaultRule:
    """Stateless baseline: always the default response."""

    kind = "constant-default"

    def __init__(self, default=0.0):
        self.default = default

    def predict(self, x):
        return self.default

    def observe(self, x, y):
        pass

    def supports_bulk(self) -> bool:
        return False


def _abs_distance(a, b):
    return abs(a - b)


def make_rule(kind: str, loss: LossModel, default=None):
    y0 = default_value(loss) if default is None else default
    if kind == "memorization":
        return MemorizationRule(default=y0)
    if kind == "frechet-memorizer":
        return FrechetMemorizerRule(loss, default=y0)
    if kind == "nearest-neighbor":
        return NearestNeighborRule(default=y0)
    if kind == "constant-default":
        return ConstantDefaultRule(default=y0)
    raise ValueError(f"unknown rule kind {kind!r}")


# --- targets ---


@dataclass(frozen=True)
class TableTarget:
    """Deterministic target given by an exact-match table."""

    mapping: dict
    noisy = False

    def __call__(self, x):
        return self.mapping[x]

    def sample_labels(self, xs, generator=None):
        if isinstance(xs, np.ndarray) and xs.dtype != object:
            keys = np.array(sorted(self.mapping))
            vals = np.array([self.mapping[k] for k in keys.tolist()], dtype=float)
            idx = np.searchsorted(keys, xs)
            return vals[idx]
        return np.array([self.mapping[x] for x in xs], dtype=float)


@dataclass(frozen=True)
class FunctionTarget:
    """Deterministic target given by an arbitrary measurable map."""

    fn: Callable
    noisy = False

    def __call__(self, x):
        return self.fn(x)

    def sample_labels(self, xs, generator=None):
        return np.array([self.fn(x) for x in xs], dtype=float)


@dataclass(frozen=True)
class GaussianLabelTarget:
    """Conditional label sampler: Y | X=x is Normal(mean(x), sigma(x)).

    The exact conditional mean doubles as the analytic Bayes predictor for
    the squared loss.
    """

    means: dict
    sigmas: dict
    noisy = True

    def conditional_mean(self, x):
        return self.means[x]

    def sample_labels(self, xs, generator):
        keys = sorted(self.means)
        mean_arr = np.array([self.means[k] for k in keys])
        sigma_arr = np.array([self.sigmas[k] for k in keys])
        idx = np.searchsorted(np.array(keys), np.asarray(xs, float))
        return mean_arr[idx] + sigma_arr[idx] * generator.standard_normal(len(xs))


# --- trajectories and protocols ---


def default_checkpoints(horizon: int) -> tuple:
    """Powers of two up to the horizon, plus the horizon itself."""
    points = []
    t = 1
    while t <= horizon:
        points.append(t)
        t *= 2
    if points[-1] != horizon:
        points.append(horizon)
    return tuple(points)


@dataclass
class LossTrajectory:
    """Per-round losses with running averages at designated checkpoints."""

    losses: np.ndarray
    checkpoints: tuple
    realization: tuple | None = None  # (xs, ys) when requested

    @property
    def horizon(self) -> int:
        return len(self.losses)

    def running_average(self, t: int) -> float:
        if not 1 <= t <= len(self.losses):
            raise ValueError("checkpoint outside the trajectory")
        return float(np.sum(self.losses[:t])) / t

    def checkpoint_averages(self) -> list:
        csum = np.cumsum(self.losses)
        return [(t, float(csum[t - 1]) / t) for t in self.checkpoints]

    def nonzero_rounds(self) -> int:
        return int(np.count_nonzero(self.losses))


def _generic_loop(pairs, predict, observe, fn, out):
    i = 0
    for x, y in pairs:
        out[i] = fn(predict(x), y)
        observe(x, y)
        i += 1


def run_online(
    rule,
    sampler,
    target,
    loss: LossModel,
    horizon: int,
    stream: int = 0,
    checkpoints: tuple | None = None,
    engine: str = "auto",
    keep_realization: bool = False,
) -> LossTrajectory:
    """Online protocol: at each round predict, incur loss, then observe.

    engine="auto" uses the rule's exact bulk path when available; "loop"
    forces the generic per-round path (they agree bitwise).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    xs = rollout(sampler, horizon, stream=stream)
    label_rng = rng(sampler.seed, "labels", stream)
    ys = target.sample_labels(xs, label_rng)

    xs_arr = xs if isinstance(xs, np.ndarray) else None
    use_bulk = (
        engine == "auto"
        and xs_arr is not None
        and xs_arr.dtype != object
        and hasattr(rule, "run_pairs")
        and rule.supports_bulk()
    )
    if use_bulk:
        losses = rule.run_pairs(xs_arr, np.asarray(ys, float), loss)
    else:
        losses = np.empty(horizon)
        seq_x = xs.tolist() if isinstance(xs, np.ndarray) else xs
        seq_y = ys.tolist() if isinstance(ys, np.ndarray) else ys
        _generic_loop(zip(seq_x, seq_y), rule.predict, rule.observe, loss.fn, losses)

    trajectory = LossTrajectory(
        losses=losses,
        checkpoints=checkpoints if checkpoints is not None else default_checkpoints(horizon),
        realization=(xs, ys) if keep_realization else None,
    )
    return trajectory


def run_inductive(
    rule,
    sampler,
    target,
    loss: LossModel,
    train_horizon: int,
    eval_horizon: int,
    stream: int = 0,
) -> float:
    """Train online on rounds < train_horizon, freeze, average the loss on
    the next eval_horizon rounds with no state updates."""
    if train_horizon < 1 or eval_horizon < 1:
        raise ValueError("horizons must be >= 1")
    total = train_horizon - 1 + eval_horizon
    xs = rollout(sampler, total, stream=stream)
    ys = target.sample_labels(xs, rng(sampler.seed, "labels", stream))
    seq_x = xs.tolist() if isinstance(xs, np.ndarray) else xs
    seq_y = ys.tolist() if isinstance(ys, np.ndarray) else ys
    for i in range(train_horizon - 1):
        rule.observe(seq_x[i], seq_y[i])
    fn = loss.fn
    predict = rule.predict
    return math.fsum(
        fn(predict(seq_x[i]), seq_y[i]) for i in range(train_horizon - 1, total)
    ) / eval_horizon


def run_self_adaptive(
    rule,
    sampler,
    target,
    loss: LossModel,
    label_horizon: int,
    eval_horizon: int,
    stream: int = 0,
) -> float:
    """Labels freeze at label_horizon; unlabeled instances keep streaming.

    The rule sees full pairs for rounds < label_horizon, then only the raw
    instances (offered through observe_instance, which the built-in rules
    deliberately ignore).  Returns the average loss over the evaluation
    window.
    """
    if label_horizon < 1 or eval_horizon < 1:
        raise ValueError("horizons must be >= 1")
    total = label_horizon - 1 + eval_horizon
    xs = rollout(sampler, total, stream=stream)
    ys = target.sample_labels(xs, rng(sampler.seed, "labels", stream))
    seq_x = xs.tolist() if isinstance(xs, np.ndarray) else xs
    seq_y = ys.tolist() if isinstance(ys, np.ndarray) else ys
    for i in range(label_horizon - 1):
        rule.observe(seq_x[i], seq_y[i])
    offer = getattr(rule, "observe_instance", None)
    fn = loss.fn
    predict = rule.predict
    acc = 0.0
    for i in range(label_horizon - 1, total):
        acc += fn(predict(seq_x[i]), seq_y[i])
        if offer is not None:
            offer(seq_x[i])
    return acc / eval_horizon


def excess_loss(
    trajectory: LossTrajectory,
    reference: Callable,
    realization: tuple,
    loss: LossModel,
) -> list:
    """Running excess averages of the trajectory against a fixed predictor.

    reference maps instances to values and must be evaluable at every
    realized X_t; the result may be negative.
    """
    xs, ys = realization
    seq_x = xs.tolist() if isinstance(xs, np.ndarray) else xs
    seq_y = ys.tolist() if isinstance(ys, np.ndarray) else ys
    fn = loss.fn
    ref_losses = np.array([fn(reference(x), y) for x, y in zip(seq_x, seq_y)])
    diff = np.cumsum(trajectory.losses - ref_losses)
    return [(t, float(diff[t - 1]) / t) for t in trajectory.checkpoints]

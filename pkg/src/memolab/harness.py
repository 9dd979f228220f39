"""Experiment orchestration: seeded runners, reports, CSV emission.

Every runner derives all randomness from (config.seed, experiment kind,
trial index, substream), so rerunning an identical config produces
byte-identical result rows.  Reals are serialized with 17 significant
digits; wall time and other non-reproducible metadata go to the JSON
sidecar, never into the CSV.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import adversary as adv
from .config import ExperimentConfig
from .frechet import FiniteLaw, check_convergence
from .learners import (
    GaussianLabelTarget,
    TableTarget,
    excess_loss,
    make_rule,
    run_online,
)
from .losses import default_value, squared_loss
from .partitions import (
    estimate_schedule,
    make_schedule,
    mc_check_fmv,
    mc_check_lemma1,
    mc_check_tail,
)
from .processes import FiniteSupportIID, GeometricDecay, UniformIID
from .errors import ConfigError


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str


@dataclass
class ExperimentReport:
    kind: str
    seed: int
    config_echo: tuple
    columns: tuple
    rows: list
    verdicts: list
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_csv_bytes(self) -> bytes:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_format_cell(cell) for cell in row))
        return ("\n".join(lines) + "\n").encode("ascii")

    def write(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_csv_bytes())
        sidecar = {
            "kind": self.kind,
            "seed": self.seed,
            "config": list(self.config_echo),
            "verdicts": [
                {"name": v.name, "passed": v.passed, "detail": v.detail}
                for v in self.verdicts
            ],
            "wall_time_seconds": self.wall_time,
        }
        with open(path + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2)
            fh.write("\n")


def _format_cell(cell) -> str:
    if isinstance(cell, bool):
        return "1" if cell else "0"
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    if isinstance(cell, (float, np.floating)):
        return f"{float(cell):.17g}"
    return str(cell)


def _fraction_log2(value: Fraction) -> float:
    return math.log2(value.numerator) - math.log2(value.denominator)


# --- standard component builders shared by runners and the acceptance suite ---


def standard_support(size: int) -> tuple:
    """Exactly representable instance points i/16, i = 1..size."""
    return tuple(i / 16.0 for i in range(1, size + 1))


def standard_labels(support) -> dict:
    """Distinct integer-valued labels per instance point."""
    return {x: float(i + 1) for i, x in enumerate(support)}


def _sampler_for(name: str, seed: int):
    if name == "iid-uniform":
        return UniformIID(seed=seed)
    if name == "geometric-decay":
        return GeometricDecay(seed=seed)
    raise ConfigError(f"partition experiments support iid-uniform or geometric-decay, got {name!r}")


# --- runners ---


def _run_consistency(config: ExperimentConfig) -> ExperimentReport:
    p = config.params
    loss = squared_loss()
    support = standard_support(p["support_size"])
    labels = standard_labels(support)
    sampler = FiniteSupportIID(support, seed=config.seed)
    target = TableTarget(labels)
    columns = ("run", "nonzero_rounds", "total_loss", "final_average", "max_default_loss", "pass")
    rows = []
    failures = 0
    for run in range(p["runs"]):
        rule = make_rule(p["rule"], loss)
        trajectory = run_online(rule, sampler, target, loss, p["horizon"], stream=run)
        nonzero = trajectory.nonzero_rounds()
        total = float(np.sum(trajectory.losses))
        worst = float(np.max(trajectory.losses)) if len(trajectory.losses) else 0.0
        ok = nonzero <= p["support_size"] and total <= p["support_size"] * worst
        failures += 0 if ok else 1
        rows.append((run, nonzero, total, total / p["horizon"], worst, ok))
    verdicts = [
        Verdict(
            "memorization-error-budget",
            failures == 0,
            f"{failures} of {p['runs']} runs exceeded the distinct-value error budget",
        )
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


def _run_bayes_excess(config: ExperimentConfig) -> ExperimentReport:
    p = config.params
    loss = squared_loss()
    support = standard_support(p["support_size"])
    means = {x: float(i - p["support_size"] // 2) for i, x in enumerate(support)}
    sigmas = {x: p["noise_sigma"] for x in support}
    target = GaussianLabelTarget(means, sigmas)
    sampler = FiniteSupportIID(support, seed=config.seed)

    def bayes_reference(x):
        return target.conditional_mean(x)

    columns = ("run", "final_excess", "pass")
    rows = []
    good = 0
    for run in range(p["runs"]):
        rule = make_rule("frechet-memorizer", loss)
        trajectory = run_online(
            rule, sampler, target, loss, p["horizon"], stream=run, keep_realization=True
        )
        excess = excess_loss(trajectory, bayes_reference, trajectory.realization, loss)
        final = excess[-1][1]
        ok = final <= p["threshold"]
        good += 1 if ok else 0
        rows.append((run, final, ok))
    needed = math.ceil(p["quota"] * p["runs"])
    verdicts = [
        Verdict(
            "bayes-excess-quota",
            good >= needed,
            f"{good}/{p['runs']} runs within excess {p['threshold']} (need {needed})",
        )
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


def _run_partition_fmv(config: ExperimentConfig) -> ExperimentReport:
    p = config.params
    sampler = _sampler_for(p["sampler"], config.seed)
    schedule = estimate_schedule(sampler, p["levels"], p["schedule_trials"])
    fmv_rows = mc_check_fmv(schedule, sampler, p["trials"], config.seed)
    columns = (
        "level", "probe_horizon", "width_log2", "trials", "hits",
        "frequency", "lower_bound", "analytic_floor", "threshold", "pass",
    )
    rows = []
    all_ok = True
    for row in fmv_rows:
        width = schedule.level(row.depth).width
        threshold = row.analytic_floor - p["margin"]
        ok = row.frequency >= threshold
        all_ok = all_ok and ok
        rows.append(
            (
                row.depth, row.horizon, _fraction_log2(width), row.trials, row.hits,
                row.frequency, row.lower, row.analytic_floor, threshold, ok,
            )
        )
    verdicts = [
        Verdict(
            "level-hit-frequency",
            all_ok,
            f"hit frequency per level vs analytic floor minus {p['margin']}",
        )
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


def lemma1_probe_set(depth: int) -> tuple:
    """Evenly spaced compliant probe set: (1/mass)**2 + 1 interior points."""
    count = (2 ** (depth + 1)) ** 2 + 1
    spacing = 1.0 / (count + 1)
    return tuple(i * spacing for i in range(1, count + 1))


def lemma1_schedule(depth: int):
    """Synthetic schedule with materializable widths through `depth` levels."""
    widths = [Fraction(1, 2 ** (4 * k + 2)) for k in range(1, depth + 1)]
    return make_schedule(widths)


def _run_lemma1(config: ExperimentConfig) -> ExperimentReport:
    p = config.params
    columns = (
        "level", "trials", "misses", "frequency", "upper_bound",
        "analytic_bound", "threshold", "pass",
    )
    rows = []
    all_ok = True
    for depth in p["levels"]:
        schedule = lemma1_schedule(depth)
        report = mc_check_lemma1(
            schedule, depth, lemma1_probe_set(depth), p["trials"], config.seed
        )
        threshold = report.analytic_bound + p["margin"]
        ok = report.upper <= threshold
        all_ok = all_ok and ok
        rows.append(
            (
                report.depth, report.trials, report.misses, report.frequency,
                report.upper, report.analytic_bound, threshold, ok,
            )
        )
    verdicts = [
        Verdict("miss-probability-bound", all_ok, "0.99 upper bound vs exp(-2**(k+1)) + margin")
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


def tail_schedule(levels: int):
    """Synthetic schedule with two intervals per level (width 2**-(k+2))."""
    return make_schedule([Fraction(1, 2 ** (k + 2)) for k in range(1, levels + 1)])


def _run_lemma2_tail(config: ExperimentConfig) -> ExperimentReport:
    p = config.params
    schedule = tail_schedule(p["levels"])
    rows_in = mc_check_tail(schedule, p["points"], p["trials"], config.seed)
    columns = ("point", "level", "trials", "hits", "frequency", "upper_bound", "bound", "pass")
    rows = []
    all_ok = True
    for row in rows_in:
        ok = row.upper < row.bound
        all_ok = all_ok and ok
        rows.append(
            (row.point, row.depth, row.trials, row.hits, row.frequency, row.upper, row.bound, ok)
        )
    verdicts = [
        Verdict("remainder-decay", all_ok, "remainder frequency upper bound vs 2**-(k-1)")
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


def _run_adversary(config: ExperimentConfig) -> ExperimentReport:
    p = config.params
    loss = squared_loss()
    sampler = GeometricDecay(seed=config.seed)
    family = adv.DyadicCellFamily(p["k_max"])
    thresholds = adv.estimate_first_visit_thresholds(
        sampler, family, p["k_max"], p["threshold_trials"], p["horizon"], seed=config.seed
    )
    rows_in = adv.evaluate_defeat(
        adv.memorization_factory(loss),
        sampler,
        family,
        thresholds,
        loss,
        p["runs"],
        p["horizon"],
        seed=config.seed,
    )
    columns = (
        "level", "deadline", "runs_observed", "mean_first_visit_loss",
        "loss_lower_bound", "mean_running_average", "pass",
    )
    rows = []
    all_ok = True
    for row in rows_in:
        ok = (
            row.mean_first_visit_loss >= 0.9 * row.deadline
            and row.mean_running_average >= 0.9
        )
        all_ok = all_ok and ok
        rows.append(
            (
                row.depth, row.deadline, row.runs_observed, row.mean_first_visit_loss,
                row.loss_lower_bound, row.mean_running_average, ok,
            )
        )
    verdicts = [
        Verdict(
            "first-visit-defeat",
            all_ok and bool(rows),
            "mean first-visit loss vs 0.9 * deadline; running average vs 0.9",
        )
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


def _run_fool_test(config: ExperimentConfig) -> ExperimentReport:
    from .spaces import unit_interval

    p = config.params
    space = unit_interval()
    transcript = adv.fool_hypothesis_test(
        adv.half_window_novelty_test,
        space.dense_point,
        p["replays"],
        max_switches=p["switches"],
        search_cap=p["search_cap"],
        seed=config.seed,
    )
    columns = ("segment", "mode", "switch_index", "frequency", "lower", "upper", "pass")
    rows = []
    all_ok = True
    previous = 0
    for i, record in enumerate(transcript.switches):
        if record.mode == "constant":
            ok = record.frequency > 0.75 and record.index > previous
        else:
            ok = record.frequency < 0.25 and record.index > previous
        previous = record.index
        all_ok = all_ok and ok
        rows.append(
            (i, record.mode, record.index, record.frequency, record.lower, record.upper, ok)
        )
    verdicts = [
        Verdict(
            "oscillating-decisions",
            all_ok and len(rows) >= p["switches"],
            "certified switch indices strictly increase with oscillating frequencies",
        )
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


def _run_frechet_convergence(config: ExperimentConfig) -> ExperimentReport:
    p = config.params
    law = FiniteLaw(p["support"])
    rows_in = check_convergence(law, p["power"], p["sizes"], p["trials"], config.seed)
    columns = ("sample_size", "trials", "mean_gap", "gap_upper", "population_risk", "pass")
    rows = []
    final_ok = True
    for row in rows_in:
        ok = True
        if row.sample_size == max(p["sizes"]):
            ok = row.mean_gap <= p["threshold"]
            final_ok = ok
        rows.append(
            (row.sample_size, row.trials, row.mean_gap, row.gap_upper, row.population_risk, ok)
        )
    verdicts = [
        Verdict(
            "risk-convergence",
            final_ok,
            f"mean risk gap at n={max(p['sizes'])} vs {p['threshold']}",
        )
    ]
    return ExperimentReport(config.kind, config.seed, config.echo(), columns, rows, verdicts)


_RUNNERS = {
    "consistency": _run_consistency,
    "bayes-excess": _run_bayes_excess,
    "partition-fmv": _run_partition_fmv,
    "lemma1": _run_lemma1,
    "lemma2-tail": _run_lemma2_tail,
    "adversary": _run_adversary,
    "fool-test": _run_fool_test,
    "frechet-convergence": _run_frechet_convergence,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch, time, and (when config.out is set) persist an experiment."""
    runner = _RUNNERS.get(config.kind)
    if runner is None:
        raise ConfigError(f"unknown experiment kind {config.kind!r}")
    start = time.perf_counter()
    report = runner(config)
    report.wall_time = time.perf_counter() - start
    if config.out:
        report.write(config.out)
    return report

import math

import numpy as np
import pytest

from memolab.stats import Summary, aggregate, binomial_lower, binomial_upper


def test_zero_successes_upper_bound_matches_closed_form():
    # P(X = 0) = (1 - p)^n = 0.01  =>  p = 1 - 0.01**(1/100)
    expected = 1.0 - 0.01 ** (1.0 / 100.0)
    assert binomial_upper(0, 100) == pytest.approx(expected, rel=1e-9)
    assert binomial_upper(0, 100) == pytest.approx(0.045, abs=5e-4)


def test_all_successes_lower_bound_matches_closed_form():
    expected = 0.01 ** (1.0 / 1000.0)
    assert binomial_lower(1000, 1000) == pytest.approx(expected, rel=1e-9)


def test_bound_edges():
    assert binomial_upper(5, 5) == 1.0
    assert binomial_lower(0, 7) == 0.0


def test_upper_bound_monotone_in_successes():
    bounds = [binomial_upper(k, 50) for k in range(51)]
    assert all(a < b for a, b in zip(bounds, bounds[1:]))


def test_bounds_bracket_the_truth():
    # coverage sanity: for p = 0.3 the 0.99 one-sided bounds should rarely miss
    gen = np.random.default_rng(0)
    miss_high = miss_low = 0
    reps = 400
    for _ in range(reps):
        k = int(gen.binomial(200, 0.3))
        if binomial_upper(k, 200) < 0.3:
            miss_high += 1
        if binomial_lower(k, 200) > 0.3:
            miss_low += 1
    assert miss_high <= 0.05 * reps
    assert miss_low <= 0.05 * reps


def test_aggregate_frequency():
    summary = aggregate([1, 0, 0, 1, 0], "frequency")
    assert summary.estimate == pytest.approx(0.4)
    assert summary.method == "binomial-exact"
    assert summary.lower < 0.4 < summary.upper


def test_aggregate_constant_mean_has_zero_width():
    summary = aggregate([2.5] * 10, "mean")
    assert summary.lower == summary.upper == summary.estimate == 2.5


def test_aggregate_single_trial_flagged():
    summary = aggregate([1.0], "mean")
    assert summary.flag == "insufficient-n"
    assert math.isinf(summary.upper)


def test_aggregate_rejects_empty_and_unknown():
    with pytest.raises(ValueError):
        aggregate([], "mean")
    with pytest.raises(ValueError):
        aggregate([1.0], "mode")


def test_summary_is_frozen():
    summary = Summary(1, 0.0, 0.0, 0.0, "degenerate")
    with pytest.raises(Exception):
        summary.estimate = 1.0

from fractions import Fraction

import numpy as np
import pytest

from memolab.processes import (
    AlternatingAdversarial,
    DeterministicList,
    FiniteSupportIID,
    GeometricDecay,
    MixedSupport,
    UniformIID,
    distinct_counts,
    prefix_stats,
    rollout,
    rollout_info,
)
from memolab.spaces import finite_space


def test_deterministic_list_echo():
    sampler = DeterministicList((0.1, 0.2, 0.1))
    assert rollout(sampler, 3) == [0.1, 0.2, 0.1]


def test_deterministic_list_cycles():
    sampler = DeterministicList((0.1, 0.2))
    assert rollout(sampler, 5) == [0.1, 0.2, 0.1, 0.2, 0.1]


def test_finite_support_containment():
    sampler = FiniteSupportIID((0.25, 0.75), seed=5)
    points = rollout(sampler, 4)
    assert len(points) == 4
    assert set(points.tolist()) <= {0.25, 0.75}


def test_geometric_decay_closed_form():
    points = rollout(GeometricDecay(), 3)
    assert points == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]


def test_geometric_decay_distinct_beyond_float_resolution():
    # float64 underflows past 2**-1074; exact points must stay distinct
    points = rollout(GeometricDecay(), 1200)
    assert len(set(points)) == 1200


def test_rollouts_reproducible_and_stream_separated():
    sampler = UniformIID(seed=42)
    a = rollout(sampler, 50, stream=3)
    b = rollout(sampler, 50, stream=3)
    c = rollout(sampler, 50, stream=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize(
    "sampler",
    [
        UniformIID(seed=1),
        FiniteSupportIID((0.25, 0.5, 0.75), weights=(0.2, 0.3, 0.5), seed=1),
        GeometricDecay(),
        DeterministicList((0.3, 0.6, 0.9)),
    ],
)
def test_rollout_prefix_stable(sampler):
    short = rollout(sampler, 40)
    long = rollout(sampler, 90)
    assert list(short)[:40] == list(long)[:40]


def test_prefix_stats_examples():
    stats = prefix_stats([0.1, 0.2, 0.1])
    assert stats.distinct_count == 2
    assert stats.min_gap == pytest.approx(0.1)

    single = prefix_stats([0.5])
    assert single.distinct_count == 1
    assert single.min_gap is None

    dyadic = prefix_stats([Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)])
    assert dyadic.distinct_count == 4
    assert dyadic.min_gap == Fraction(1, 16)


def test_prefix_stats_pairwise_oracle():
    # brute force over all pairs must agree with the sorted-adjacent shortcut
    gen = np.random.default_rng(7)
    for _ in range(50):
        points = gen.choice(np.arange(16) / 16.0, size=10).tolist()
        stats = prefix_stats(points)
        distinct = sorted(set(points))
        if len(distinct) >= 2:
            brute = min(
                abs(a - b) for i, a in enumerate(distinct) for b in distinct[i + 1 :]
            )
            assert stats.min_gap == pytest.approx(brute)


def test_prefix_stats_custom_space():
    space = finite_space(("a", "b", "c"))
    stats = prefix_stats(["a", "b", "a"], space)
    assert stats.distinct_count == 2
    assert stats.min_gap == 1.0


def test_prefix_stats_monotone_under_extension():
    sampler = UniformIID(seed=8)
    points = rollout(sampler, 200).tolist()
    prev = prefix_stats(points[:50])
    for t in (100, 150, 200):
        cur = prefix_stats(points[:t])
        assert cur.distinct_count >= prev.distinct_count
        if prev.min_gap is not None:
            assert cur.min_gap <= prev.min_gap
        prev = cur


def test_decay_distinct_count_equals_horizon():
    points = rollout(GeometricDecay(), 128)
    assert np.array_equal(distinct_counts(points), np.arange(1, 129))


def test_finite_support_distinct_bounded_and_saturating():
    m = 5
    support = tuple(i / 8 for i in range(1, m + 1))
    reached = 0
    trials = 1000
    for t in range(trials):
        points = rollout(FiniteSupportIID(support, seed=123), 100 * m, stream=t)
        distinct = len(np.unique(points))
        assert distinct <= m
        reached += distinct == m
    assert reached >= 0.99 * trials


def test_mixed_branch_indicator_and_rate():
    mixed = MixedSupport(
        finite=FiniteSupportIID((0.25, 0.75), seed=0),
        infinite=UniformIID(seed=0),
        infinite_prob=0.3,
        seed=77,
    )
    infinite = 0
    for t in range(400):
        info = rollout_info(mixed, 20, stream=t)
        again = rollout_info(mixed, 20, stream=t)
        assert info.infinite_branch == again.infinite_branch
        assert list(info.points) == list(again.points)
        if info.infinite_branch:
            infinite += 1
            assert len(set(np.asarray(info.points).tolist())) == 20
        else:
            assert set(np.asarray(info.points).tolist()) <= {0.25, 0.75}
    assert 0.2 <= infinite / 400 <= 0.4


def test_alternating_adversarial_modes():
    enum = lambda t: t / 1024.0
    sampler = AlternatingAdversarial((3, 5), anchor=0.5, enumeration=enum)
    points = rollout(sampler, 8)
    assert points[:3] == [0.5, 0.5, 0.5]
    assert points[3:5] == [enum(4), enum(5)]
    assert points[5:] == [0.5, 0.5, 0.5]
    assert sampler.support_class == "certainly-infinite"
    assert AlternatingAdversarial((3,), anchor=0.5, enumeration=enum).support_class == (
        "certainly-finite"
    )


def test_invalid_inputs_rejected():
    with pytest.raises(ValueError):
        FiniteSupportIID(())
    with pytest.raises(ValueError):
        rollout(UniformIID(), 0)
    with pytest.raises(ValueError):
        prefix_stats([])
    with pytest.raises(ValueError):
        MixedSupport(FiniteSupportIID((0.5,)), UniformIID(), infinite_prob=1.5)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from memolab.errors import HorizonInsufficientError
from memolab.processes import DeterministicList, FiniteSupportIID, UniformIID
from memolab.spaces import (
    box,
    cover_for_process,
    finite_space,
    greedy_cover,
    real_line,
    unit_interval,
)


def test_dense_enumeration_prefix():
    space = unit_interval()
    assert space.dense_prefix(7) == [1 / 2, 1 / 4, 3 / 4, 1 / 8, 3 / 8, 5 / 8, 7 / 8]


def test_single_ball_covers_unit_interval():
    # delta = 1: one closed ball of radius 1/2 around the midpoint is everything
    cover = greedy_cover(unit_interval(), 1.0, 1)
    for x in np.linspace(0, 1, 257):
        assert cover.cell_of(float(x)) == 1


def test_three_cell_cover_matches_interval_arithmetic():
    # hand-derived cells for delta = 1/2 and centers 1/2, 1/4, 3/4:
    #   cell 1 = [1/4, 3/4], cell 2 = [0, 1/4), cell 3 = (3/4, 1]
    cover = greedy_cover(unit_interval(), 0.5, 3)

    def oracle(x):
        if 0.25 <= x <= 0.75:
            return 1
        if x < 0.25:
            return 2
        return 3

    for x in np.linspace(0, 1, 1025):
        assert cover.cell_of(float(x)) == oracle(float(x))


def test_finite_space_singleton_cells():
    space = finite_space(("a", "b", "c"))
    cover = greedy_cover(space, 0.5, 3)
    assert cover.cell_of("a") == 1
    assert cover.cell_of("b") == 2
    assert cover.cell_of("c") == 3


def test_greedy_cover_deterministic():
    a = greedy_cover(unit_interval(), 0.3, 10)
    b = greedy_cover(unit_interval(), 0.3, 10)
    assert [(c.index, c.center, c.radius) for c in a.cells] == [
        (c.index, c.center, c.radius) for c in b.cells
    ]


@given(
    delta=st.sampled_from([1 / 4, 1 / 8, 3 / 16, 1 / 32]),
    count=st.integers(min_value=1, max_value=40),
    seed=st.integers(min_value=0, max_value=50),
)
def test_cover_cells_disjoint_with_bounded_diameter(delta, count, seed):
    space = unit_interval()
    cover = greedy_cover(space, delta, count)
    gen = np.random.default_rng(seed)
    points = gen.random(64)
    members = {}
    for x in points.tolist():
        # membership oracle: first ball hit, recomputed from raw cell data
        expected = None
        for cell in cover.cells:
            if abs(x - cell.center) <= cell.radius:
                expected = cell.index
                break
        assert cover.cell_of(x) == expected
        if expected is not None:
            members.setdefault(expected, []).append(x)
    for index, xs in members.items():
        assert max(xs) - min(xs) <= delta + 1e-15


def test_metric_axioms_on_samples():
    spaces = [unit_interval(), real_line(), box(2)]
    gen = np.random.default_rng(3)
    for space in spaces:
        for _ in range(100):
            if space.kind == "box":
                a, b, c = (tuple(gen.random(2)) for _ in range(3))
            else:
                a, b, c = (float(v) for v in gen.normal(size=3))
            assert space.distance(a, a) == 0.0
            assert space.distance(a, b) == space.distance(b, a)
            assert space.distance(a, c) <= space.distance(a, b) + space.distance(b, c) + 1e-12


def test_dense_enumeration_reaches_every_point():
    # every sampled point is within eps of some finite-index dense point
    gen = np.random.default_rng(4)
    for space, points in [
        (unit_interval(), gen.random(20)),
        (real_line(), gen.normal(scale=2.0, size=20)),
    ]:
        for x in points.tolist():
            hit = any(
                space.distance(x, space.dense_point(k)) <= 0.05 for k in range(1, 4000)
            )
            assert hit


def test_box_dense_points_live_inside():
    space = box(2)
    for k in range(1, 40):
        p = space.dense_point(k)
        assert len(p) == 2 and all(0 < c < 1 for c in p)


def test_cover_for_process_constant_sampler():
    sampler = DeterministicList((0.5,), seed=0)
    m, cover = cover_for_process(
        unit_interval(), sampler, epsilon=0.2, delta=0.25, min_count=1, horizon=5, trials=30
    )
    assert m == 1
    assert cover.cell_of(0.5) == 1


def test_cover_for_process_two_point_support():
    # oracle: enumerate dense balls until both support points are covered
    space = unit_interval()
    delta = 1 / 16
    support = (1 / 8, 7 / 8)
    needed = 0
    for target in support:
        k = 1
        while space.distance(target, space.dense_point(k)) > delta / 2:
            k += 1
        needed = max(needed, k)
    assert needed == 7  # frozen from the dyadic enumeration

    sampler = FiniteSupportIID(support, seed=9)
    m, cover = cover_for_process(
        space, sampler, epsilon=0.05, delta=delta, min_count=2, horizon=12, trials=120
    )
    assert m == needed
    assert all(cover.cell_of(x) is not None for x in support)


def test_cover_for_process_uniform_certifies_small_prefix():
    space = unit_interval()
    sampler = UniformIID(seed=2)
    m, cover = cover_for_process(
        space, sampler, epsilon=0.1, delta=0.1, min_count=4, horizon=4, trials=4000
    )
    assert 4 <= m <= 30
    # brute-force coverage oracle: per-draw escape mass of the first m cells
    grid = np.linspace(0, 1, 200001)
    covered = np.zeros(len(grid), dtype=bool)
    for cell in cover.cells:
        covered |= np.abs(grid - cell.center) <= cell.radius
    escape_mass = 1.0 - covered.mean()
    assert 1.0 - (1.0 - escape_mass) ** 4 < 0.1


def test_cover_for_process_insufficient_trials_rejected():
    with pytest.raises(ValueError):
        cover_for_process(
            unit_interval(), UniformIID(seed=0), 0.01, 0.1, 1, horizon=2, trials=10
        )

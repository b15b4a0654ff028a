"""Seed discipline: substream addressing, block plans, l1 ball sampling."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from crosspoly import l1_ball_point, substream
from crosspoly.rand import BLOCK_SIZE, block_plan


def test_substream_same_path_same_stream():
    a = substream(7, 1, 2).standard_normal(8)
    b = substream(7, 1, 2).standard_normal(8)
    np.testing.assert_array_equal(a, b)


def test_substream_distinct_paths_distinct_streams():
    draws = {
        tuple(substream(7, *path).integers(2**32, size=4))
        for path in [(), (0,), (1,), (0, 0), (0, 1), (1, 0)]
    }
    assert len(draws) == 6


def test_substream_path_is_not_flattened():
    # (1, 2) and (12,) must not collide: the path is a spawn key, not a
    # string concatenation
    a = substream(7, 1, 2).integers(2**32, size=4)
    b = substream(7, 12).integers(2**32, size=4)
    assert not np.array_equal(a, b)


def test_block_plan_covers_exactly():
    plan = list(block_plan(2 * BLOCK_SIZE + 17))
    assert plan == [(0, BLOCK_SIZE), (1, BLOCK_SIZE), (2, 17)]
    assert sum(length for _, length in plan) == 2 * BLOCK_SIZE + 17
    assert list(block_plan(5, block_size=2)) == [(0, 2), (1, 2), (2, 1)]
    assert list(block_plan(0)) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10**7))
def test_block_plan_partitions_any_count(samples):
    plan = list(block_plan(samples))
    assert sum(length for _, length in plan) == samples
    assert [b for b, _ in plan] == list(range(len(plan)))
    assert all(0 < length <= BLOCK_SIZE for _, length in plan)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_l1_ball_point_stays_inside(seed, n):
    x = l1_ball_point(substream(seed, 600), n)
    assert x.shape == (n,)
    assert np.abs(x).sum() <= 1.0 + 1e-12


def test_l1_ball_point_radius_scales():
    x = l1_ball_point(substream(9, 601), 12, radius=3.0)
    y = l1_ball_point(substream(9, 601), 12, radius=1.0)
    np.testing.assert_allclose(x, 3.0 * y, rtol=1e-12)


def test_l1_ball_point_fills_the_ball():
    # the sampler is not confined to the boundary or a quadrant
    norms = []
    signs_seen = set()
    for i in range(400):
        x = l1_ball_point(substream(10, i), 3)
        norms.append(np.abs(x).sum())
        signs_seen.update(np.sign(x[x != 0]))
    assert min(norms) < 0.5 < max(norms)
    assert signs_seen == {-1.0, 1.0}

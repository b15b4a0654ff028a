"""Minimum-l1 representations: simplex vs brute force, vertex structure."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosspoly import (
    InputError,
    brute_force_min_l1,
    l1_decomposition_cover_check,
    min_l1_representation,
    substream,
)
from crosspoly.errors import InfeasibleError


def test_identity_system_is_trivial():
    rep = min_l1_representation(np.eye(3), np.array([2.0, -1.0, 0.0]))
    assert rep.tau == pytest.approx(3.0, rel=1e-12)
    assert set(rep.support) == {0, 1}
    np.testing.assert_allclose(rep.coefficients, [2.0, -1.0, 0.0], atol=1e-12)


def test_duplicated_columns_share_mass_optimally():
    # y = e1 reachable through either copy; tau must be 1 either way
    M = np.array([[1.0, 1.0], [0.0, 0.0]])
    rep = min_l1_representation(M, np.array([1.0, 0.0]))
    assert rep.tau == pytest.approx(1.0, rel=1e-12)
    assert len(rep.support) == 1


def test_infeasible_system_raises():
    M = np.array([[1.0, 2.0], [0.0, 0.0]])
    with pytest.raises(InfeasibleError):
        min_l1_representation(M, np.array([0.0, 1.0]))


def test_zero_target_gives_zero_representation():
    rep = min_l1_representation(np.eye(2), np.zeros(2))
    assert rep.tau == 0.0
    assert rep.support == ()


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("shape", [(3, 6), (4, 8)])
def test_simplex_matches_brute_force(seed, shape):
    rows, cols = shape
    M = substream(seed, 0).standard_normal((rows, cols))
    y = substream(seed, 1).standard_normal(rows)
    rep = min_l1_representation(M, y)
    tau_star, _, _ = brute_force_min_l1(M, y)
    assert rep.tau == pytest.approx(tau_star, rel=1e-9, abs=1e-9)
    # reconstruction and vertex structure
    np.testing.assert_allclose(M @ rep.coefficients, y, atol=1e-8)
    assert len(rep.support) <= np.linalg.matrix_rank(M)
    assert np.count_nonzero(rep.coefficients) == len(rep.support)
    assert abs(np.abs(rep.coefficients).sum() - rep.tau) <= 1e-10 * (1 + rep.tau)
    if rep.support:
        sv = np.linalg.svd(M[:, list(rep.support)], compute_uv=False)
        assert sv[-1] > 1e-10 * sv[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tau_is_scale_equivariant(seed):
    M = substream(seed, 10).standard_normal((3, 7))
    y = substream(seed, 11).standard_normal(3)
    rep1 = min_l1_representation(M, y)
    rep2 = min_l1_representation(M, 2.5 * y)
    assert rep2.tau == pytest.approx(2.5 * rep1.tau, rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tau_subadditive_in_target(seed):
    M = substream(seed, 20).standard_normal((3, 8))
    y1 = substream(seed, 21).standard_normal(3)
    y2 = substream(seed, 22).standard_normal(3)
    t1 = min_l1_representation(M, y1).tau
    t2 = min_l1_representation(M, y2).tau
    t12 = min_l1_representation(M, y1 + y2).tau
    assert t12 <= t1 + t2 + 1e-8 * (1 + t1 + t2)


def test_cover_check_accepts_generic_system():
    M = substream(31, 0).standard_normal((4, 8))
    out = l1_decomposition_cover_check(M, samples=60, rng_seed=5)
    assert out["holds"]
    assert out["violations"] == 0
    assert out["rank"] == 4
    assert out["max_support_size"] <= out["rank"]


def test_cover_check_rejects_oversized_input():
    with pytest.raises(InputError):
        l1_decomposition_cover_check(np.zeros((3, 40)), samples=5)


def test_brute_force_rejects_huge_enumeration():
    M = substream(40).standard_normal((10, 60))
    with pytest.raises(InputError):
        brute_force_min_l1(M, np.ones(10))

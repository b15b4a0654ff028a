"""Hull membership, Gram-Schmidt chains, volumes, projections, absorption."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosspoly import (
    CrossPolytope,
    InputError,
    ThickenedPolytope,
    cross_polytope_volume,
    distance_to_hull,
    gram_schmidt_chain,
    hull_contains,
    minkowski_absorb_check,
    project_polytope,
    substream,
    support_function,
)


def test_crosspolytope_validates_generators():
    with pytest.raises(InputError):
        CrossPolytope(np.zeros((0, 3)))
    with pytest.raises(InputError):
        CrossPolytope(np.array([[1.0, np.nan]]))
    with pytest.raises(InputError):
        CrossPolytope(np.eye(3), scale=0.0)


def test_standard_crosspolytope_membership():
    P = CrossPolytope(np.eye(3))
    inside = np.array([[0.3, 0.3, 0.3], [1.0, 0.0, 0.0], [0.0, -0.5, 0.5]])
    outside = np.array([[0.5, 0.5, 0.500001], [1.1, 0.0, 0.0]])
    assert hull_contains(P, inside).all()
    assert not hull_contains(P, outside).any()


def test_scale_acts_linearly():
    P2 = CrossPolytope(np.eye(2), scale=3.0)
    assert hull_contains(P2, np.array([[1.5, 1.5]])).all()
    assert not hull_contains(P2, np.array([[1.6, 1.6]])).any()


def test_distance_to_hull_exact_square_case():
    P = CrossPolytope(np.eye(2))
    # (1,1) sits at l1 norm 2, so distance to the unit ball is
    # (2-1)/sqrt(2) along the diagonal facet normal
    d = distance_to_hull(P, np.array([1.0, 1.0]))
    assert d == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-7)
    assert distance_to_hull(P, np.array([0.2, 0.2])) == pytest.approx(0.0, abs=1e-9)


def test_support_function_matches_max_dot():
    rng = substream(71)
    G = rng.standard_normal((6, 4))
    P = CrossPolytope(G, scale=1.7)
    for _ in range(20):
        u = rng.standard_normal(4)
        want = 1.7 * np.max(np.abs(G @ u))
        assert support_function(P, u) == pytest.approx(want, rel=1e-12)


def test_thickened_membership_is_distance_threshold():
    base = CrossPolytope(np.eye(2))
    T = ThickenedPolytope(base, eta=0.25)
    pts = np.array([[1.1, 0.0], [0.0, 1.26], [1.0 + 0.25 / math.sqrt(2) - 1e-3,
                                              0.25 / math.sqrt(2) - 1e-3]])
    got = hull_contains(T, pts)
    assert got[0] and not got[1] and got[2]


def test_gram_schmidt_chain_shrinks_determinant():
    rng = substream(72)
    V = rng.standard_normal((5, 5))
    chain = gram_schmidt_chain(V)
    # chain distances are the Gram-Schmidt norms; their product is |det|
    prod = float(np.prod(chain.distances))
    assert prod == pytest.approx(abs(np.linalg.det(V)), rel=1e-9)
    assert chain.rank == 5
    assert (chain.distances > 0).all()
    # each distance is at most the corresponding row norm
    norms = np.linalg.norm(V, axis=1)[list(chain.order)]
    assert (chain.distances <= norms + 1e-12).all()


def test_volume_unit_ball_exact():
    # vol(B_1^d) = 2^d / d!
    assert cross_polytope_volume(np.eye(3)) == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert cross_polytope_volume(np.eye(4)) == pytest.approx(16.0 / 24.0, rel=1e-12)


def test_volume_scales_like_determinant():
    rng = substream(73)
    A = rng.standard_normal((3, 3))
    want = abs(np.linalg.det(A)) * (2.0**3 / 6.0)
    assert cross_polytope_volume(A) == pytest.approx(want, rel=1e-9)


def test_project_polytope_drops_coordinates():
    P = CrossPolytope(np.eye(3), scale=2.0)
    B = np.eye(3)[:, :2]
    Q = project_polytope(P, B)
    assert Q.generators.shape == (3, 2)
    assert Q.scale == 2.0
    # the shadow of B_1^3 on a coordinate plane is B_1^2
    assert hull_contains(Q, np.array([[1.9, 0.0], [0.9, 0.9]])).all()
    assert not hull_contains(Q, np.array([[1.1, 1.1]])).any()


def test_project_polytope_rejects_nonorthonormal():
    P = CrossPolytope(np.eye(3))
    with pytest.raises(InputError):
        project_polytope(P, np.ones((3, 2)))


def test_absorb_check_scaled_copies():
    # K subset of (1+delta) K always holds with zero violations
    rng = substream(74)
    K = CrossPolytope(rng.standard_normal((4, 3)))
    out = minkowski_absorb_check(K, K, delta=0.5, num_directions=2000,
                                 rng_seed=7)
    assert out["violations"] == 0
    assert out["holds"]


def test_absorb_check_dimension_mismatch():
    K = CrossPolytope(np.eye(2))
    L = CrossPolytope(np.eye(3))
    with pytest.raises(InputError):
        minkowski_absorb_check(K, L, delta=0.3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_membership_invariant_under_generator_permutation(seed, d):
    rng = substream(seed, 901)
    G = rng.standard_normal((d + 2, d))
    pts = rng.standard_normal((16, d)) * 0.8
    P = CrossPolytope(G)
    perm = rng.permutation(d + 2)
    Pp = CrossPolytope(G[perm])
    assert (hull_contains(P, pts) == hull_contains(Pp, pts)).all()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_zero_iff_contained(seed):
    rng = substream(seed, 902)
    G = rng.standard_normal((6, 3))
    P = CrossPolytope(G)
    pts = rng.standard_normal((8, 3))
    member = hull_contains(P, pts, tol=1e-9)
    for x, inside in zip(pts, member):
        d = distance_to_hull(P, x)
        scale = 1.0 + float(np.linalg.norm(x))
        if inside:
            # membership means true distance <= 1e-9*scale; the distance
            # solver may overshoot by its own closing tolerance
            assert d <= 2e-9 * scale
        else:
            assert d > 1e-9

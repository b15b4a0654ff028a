"""Random polytope pipeline: generation, nets, splits, exposure, the bridge
identity, powering, and the distance estimator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosspoly import (
    CrossPolytope,
    InputError,
    bm_estimate,
    bridge_check,
    gen_gluskin,
    powering_check,
    random_coefficient_matrix,
    substream,
    u_norm_event_check,
)
from crosspoly.errors import ContractError
from crosspoly.gluskin import (
    CoefficientMatrix,
    exposed,
    ku_split,
    net_log_cardinality,
    quantize,
    sample_u_class,
    u_net_log_cardinality,
)


def test_gen_gluskin_shapes_and_determinism():
    G1, P1 = gen_gluskin(3, 27, rng_seed=1)
    G2, P2 = gen_gluskin(3, 27, rng_seed=1)
    assert G1.shape == (3, 27)
    np.testing.assert_array_equal(G1, G2)
    np.testing.assert_array_equal(P1.generators, G1.T)
    with pytest.raises(InputError):
        gen_gluskin(5, 3)


def test_coefficient_matrix_gates():
    ok = np.zeros((6, 3))
    ok[0, 0] = 0.5
    CoefficientMatrix(ok)
    bad = np.zeros((6, 3))
    bad[:, 0] = 0.5  # column l1 norm 3 > 1
    with pytest.raises(InputError):
        CoefficientMatrix(bad)
    with pytest.raises(InputError):
        CoefficientMatrix(np.full((2, 2), np.nan))


def test_random_coefficient_matrix_properties():
    A = random_coefficient_matrix(8, 4, rng_seed=2)
    assert A.m == 8 and A.n == 4
    assert (np.abs(A.matrix).sum(axis=0) <= 1.0 + 1e-12).all()
    B = random_coefficient_matrix(8, 4, rng_seed=2)
    np.testing.assert_array_equal(A.matrix, B.matrix)


def test_random_coefficient_matrix_support_confinement():
    A = random_coefficient_matrix(8, 4, rng_seed=3, support_rows=range(3))
    assert not A.matrix[3:].any()


def test_ku_split_is_exact_partition():
    A = random_coefficient_matrix(10, 5, rng_seed=4)
    split = ku_split(A, s=3)
    K, U = split.K_part.matrix, split.U_part.matrix
    np.testing.assert_array_equal(K + U, A.matrix)
    assert (np.abs(K[K != 0]) >= 1.0 / 3).all()
    assert (np.abs(U[U != 0]) < 1.0 / 3).all()
    # no entry appears on both sides
    assert not ((K != 0) & (U != 0)).any()


def test_quantize_idempotent_and_contractive():
    A = random_coefficient_matrix(9, 4, rng_seed=5)
    eps = 0.1
    Q = quantize(A, eps)
    Q2 = quantize(Q, eps)
    np.testing.assert_array_equal(Q.matrix, Q2.matrix)
    assert (np.abs(Q.matrix) <= np.abs(A.matrix) * (1 + 1e-12)).all()
    assert (np.abs(Q.matrix - A.matrix) <= eps * (1 + 1e-12)).all()
    assert Q.mesh == eps


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1),
       st.sampled_from([0.5, 0.25, 0.2, 0.1, 0.05]))
def test_quantize_mesh_points_are_fixed(seed, eps):
    # two mesh entries of magnitude <= eps per column keeps the column
    # l1 norm at most 2 eps <= 1 and the support size at 2
    rng = substream(seed, 700)
    M = np.zeros((4, 2))
    M[0:2, 0] = rng.integers(-1, 2, size=2) * eps
    M[2:4, 1] = rng.integers(-1, 2, size=2) * eps
    A = CoefficientMatrix(M)
    np.testing.assert_array_equal(quantize(A, eps).matrix, M)


def test_net_log_cardinalities():
    assert net_log_cardinality(3, 27, 0.1) == pytest.approx(
        9 * math.log(6 * 27 / (3 * 0.1)), rel=1e-12)
    assert u_net_log_cardinality(3, 27, 0.1) == pytest.approx(
        3 * math.log(6 * 27 / 0.1), rel=1e-12)
    # the sparse net is the larger of the two for n >= 2
    assert net_log_cardinality(4, 30, 0.1) > u_net_log_cardinality(4, 30, 0.1)


def test_exposed_restriction_identity_bitwise():
    A = random_coefficient_matrix(8, 4, rng_seed=6, support_rows=range(5))
    Gamma = substream(7).standard_normal((4, 8))
    real = exposed(A, Gamma)
    assert set(real.S) <= set(range(5))
    assert real.N_A == 8 - len(real.S)
    assert real.gamma_S.shape == (4, len(real.S))
    np.testing.assert_array_equal(real.gamma_S, Gamma[:, list(real.S)])


def test_bridge_holds_on_random_instances():
    A = random_coefficient_matrix(8, 4, rng_seed=8)
    Gamma = substream(9).standard_normal((4, 8))
    out = bridge_check(A, Gamma, rho=2.0, s=2, samples=60, rng_seed=10)
    assert out["holds"]
    assert out["violations"] == []


def test_bridge_gates_large_n():
    A = random_coefficient_matrix(10, 8, rng_seed=11)
    Gamma = substream(12).standard_normal((8, 10))
    with pytest.raises(InputError):
        bridge_check(A, Gamma, rho=2.0, s=2, samples=5)


def test_powering_identity_agrees():
    A = random_coefficient_matrix(6, 3, rng_seed=13, support_rows=range(4))
    out = powering_check(3, 6, rho=1.5, A=A, outer_trials=120,
                         inner_samples=20_000, rng_seed=14)
    assert out["agree"]
    assert out["exposed_in"] <= 4
    lo, hi = out["rhs_ci"]
    assert lo <= out["lhs"] <= hi or abs(out["lhs"] - out["rhs"]) <= 0.05


def test_powering_gates():
    A = random_coefficient_matrix(12, 5, rng_seed=15)
    with pytest.raises(InputError):
        powering_check(5, 12, rho=1.5, A=A, outer_trials=10,
                       inner_samples=1000)


def test_sample_u_class_respects_constraints():
    rng = substream(16)
    for _ in range(50):
        u = sample_u_class(rng, m=12, n=6, epsilon=0.05, s=2)
        assert u.shape == (12,)
        assert np.count_nonzero(u) <= 6
        assert float(u @ u) <= 1.0 / 2 + 1e-12
        # entries live on the mesh
        k = u / 0.05
        np.testing.assert_allclose(k, np.round(k), atol=1e-9)


def test_u_norm_event_check_runs_and_holds():
    out = u_norm_event_check(n=8, m=24, s=2, epsilon=0.05, rho=4.0,
                             trials=40, rng_seed=17)
    assert out["holds"]
    assert out["violations"] == 0
    assert out["max_norm"] <= out["L"]


def test_u_norm_event_check_gates():
    with pytest.raises(InputError):
        u_norm_event_check(n=30, m=60, s=2, epsilon=0.05, rho=4.0, trials=2)


def test_bm_estimate_identity_body():
    K = CrossPolytope(np.eye(3))
    out = bm_estimate(K, restarts=2, rng_seed=1)
    assert out["rho"] == pytest.approx(1.0, abs=1e-6)


def test_bm_estimate_worker_invariance():
    _, K = gen_gluskin(3, 9, rng_seed=18)
    a = bm_estimate(K, restarts=2, rng_seed=19, workers=1)
    b = bm_estimate(K, restarts=2, rng_seed=19, workers=4)
    assert a["rho"] == b["rho"]


def test_bm_estimate_scale_near_invariance():
    # the distance itself ignores scaling; the local search is only
    # approximately invariant because restart bases scale with the body
    _, K = gen_gluskin(3, 9, rng_seed=20)
    K2 = CrossPolytope(K.generators, scale=3.0)
    a = bm_estimate(K, restarts=2, rng_seed=21)
    b = bm_estimate(K2, restarts=2, rng_seed=21)
    assert a["rho"] >= 1.0 - 1e-9 and b["rho"] >= 1.0 - 1e-9
    assert a["rho"] == pytest.approx(b["rho"], rel=1e-3)

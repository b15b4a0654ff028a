"""Random polytope experiment harness: generation, sparse coefficient
classes, K/U thresholding, mesh quantization, exposed column sets, the
powering identity, the bridge inclusion, and a heuristic distance estimator
to the l1 ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InfeasibleError, InputError
from .gauss_mc import clopper_pearson, mc_measure
from .geometry import CrossPolytope, hull_contains
from .rand import l1_ball_point, substream
from .sparse_l1 import min_l1_representation

L1_TOL = 1e-12
MESH_RTOL = 1e-9


@dataclass(frozen=True)
class CoefficientMatrix:
    """m x n matrix whose columns have l1 norm <= 1 and support size <= n;
    optionally all entries lie on the mesh epsilon * Z."""

    matrix: np.ndarray
    mesh: float | None = None

    def __post_init__(self):
        A = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if A.ndim != 2:
            raise InputError("matrix must be 2-d (m x n)")
        if not np.all(np.isfinite(A)):
            raise InputError("entries must be finite")
        m, n = A.shape
        col_l1 = np.abs(A).sum(axis=0)
        if col_l1.max(initial=0.0) > 1.0 + L1_TOL:
            raise InputError("every column must have l1 norm at most 1")
        if m > n and int((A != 0.0).sum(axis=0).max(initial=0)) > n:
            raise InputError("every column must have support size at most n")
        if self.mesh is not None:
            eps = float(self.mesh)
            if not 0.0 < eps <= 1.0:
                raise InputError("mesh must lie in (0, 1]")
            k = np.rint(A / eps)
            if np.abs(A - k * eps).max(initial=0.0) > MESH_RTOL * eps:
                raise InputError("entries must lie on the mesh epsilon * Z")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class KUSplit:
    """Exact threshold decomposition A = K + U at level 1/s."""

    K_part: CoefficientMatrix
    U_part: CoefficientMatrix
    s: int


@dataclass(frozen=True)
class ExposedRealization:
    """Union of column supports and the Gaussian columns it pins down."""

    S: tuple
    gamma_S: np.ndarray
    N_A: int


def gen_gluskin(n: int, m: int, rng_seed: int = 0):
    """n x m standard Gaussian matrix and the hull of its signed columns."""
    if n < 1 or m < n:
        raise InputError("need n >= 1 and m >= n")
    Gamma = substream(rng_seed).standard_normal((n, m))
    return Gamma, CrossPolytope(np.ascontiguousarray(Gamma.T))


def random_coefficient_matrix(m: int, n: int, rng_seed: int = 0,
                              mesh: float | None = None,
                              support_rows=None) -> CoefficientMatrix:
    """Random member of the coefficient class: each column is drawn from the
    l1 ball on at most n rows (restricted to `support_rows` when given),
    then snapped to the mesh if one is requested."""
    rows = np.arange(m) if support_rows is None else np.asarray(
        sorted(support_rows), dtype=int)
    if rows.size < 1 or rows.min() < 0 or rows.max() >= m:
        raise InputError("support_rows must be a nonempty subset of [m]")
    A = np.zeros((m, n))
    for i in range(n):
        rng = substream(rng_seed, i)
        size = int(rng.integers(1, min(n, rows.size) + 1))
        supp = rng.choice(rows, size=size, replace=False)
        A[supp, i] = l1_ball_point(rng, size)
    out = CoefficientMatrix(A)
    return quantize(out, mesh) if mesh is not None else out


def ku_split(A: CoefficientMatrix, s: int) -> KUSplit:
    """Threshold each column at 1/s: entries with |a| >= 1/s form K, the
    rest form U; K + U = A exactly."""
    s = int(s)
    if not 1 <= s <= A.n:
        raise InputError("need 1 <= s <= n")
    big = np.abs(A.matrix) >= 1.0 / s
    K = np.where(big, A.matrix, 0.0)
    U = np.where(big, 0.0, A.matrix)
    return KUSplit(K_part=CoefficientMatrix(K, mesh=A.mesh),
                   U_part=CoefficientMatrix(U, mesh=A.mesh), s=s)


def quantize(A: CoefficientMatrix, epsilon: float) -> CoefficientMatrix:
    """Entrywise floor toward zero onto the mesh: eps * sgn(t) * floor(|t|/eps).

    A one-ulp promotion guard keeps mesh points fixed, so the map is
    idempotent; the l1 monotonicity and the perturbation bound then hold to
    relative 1e-12.
    """
    eps = float(epsilon)
    if not 0.0 < eps <= 1.0:
        raise InputError("epsilon must lie in (0, 1]")
    T = np.abs(A.matrix)
    k = np.floor(T / eps)
    promote = (k + 1.0) * eps <= T * (1.0 + 1e-12)
    k = np.where(promote, k + 1.0, k)
    Q = np.sign(A.matrix) * k * eps
    return CoefficientMatrix(Q, mesh=eps)


def net_log_cardinality(n: int, m: int, epsilon: float) -> float:
    """log-cardinality bound n^2 log(6 m / (n epsilon)) of the sparse
    coefficient net."""
    if n < 1 or m < 1 or not 0.0 < epsilon <= 1.0:
        raise InputError("need n, m >= 1 and epsilon in (0, 1]")
    return float(n * n * math.log(6.0 * m / (n * epsilon)))


def u_net_log_cardinality(n: int, m: int, epsilon: float) -> float:
    """Companion bound n log(6 m / epsilon) for the short-vector class."""
    if n < 1 or m < 1 or not 0.0 < epsilon <= 1.0:
        raise InputError("need n, m >= 1 and epsilon in (0, 1]")
    return float(n * math.log(6.0 * m / epsilon))


def _sequential_product(G, A, rows):
    """Left-to-right accumulated product restricted to the given rows of A.

    Fixing the accumulation order makes dropping exactly-zero rows a bitwise
    no-op, which BLAS kernels do not guarantee across shapes.
    """
    out = np.zeros((G.shape[0], A.shape[1]))
    for i in range(G.shape[0]):
        for k in range(A.shape[1]):
            acc = 0.0
            for j in rows:
                acc += G[i, j] * A[j, k]
            out[i, k] = acc
    return out


def exposed(A: CoefficientMatrix, Gamma) -> ExposedRealization:
    """Union S of column supports plus the columns of Gamma it exposes.

    The restriction identity Gamma A = Gamma_S A_S must hold bit-for-bit in
    a fixed summation order: rows of A outside S are zero, so restriction is
    index bookkeeping with no arithmetic difference.
    """
    Gamma = np.asarray(Gamma, dtype=np.float64)
    if Gamma.ndim != 2 or Gamma.shape[1] != A.m:
        raise InputError("Gamma must be n x m for the m of A")
    S = np.flatnonzero((A.matrix != 0.0).any(axis=1))
    full = _sequential_product(Gamma, A.matrix, range(A.m))
    restricted = _sequential_product(Gamma, A.matrix, S)
    if not np.array_equal(full, restricted):
        raise ContractError("restriction identity violated beyond 0 ulp")
    return ExposedRealization(S=tuple(int(j) for j in S),
                              gamma_S=Gamma[:, S], N_A=A.m - S.size)


def _body(A: CoefficientMatrix, Gamma, rho: float) -> CrossPolytope:
    """2 rho conv{+-(Gamma A) e_i}: the containment body of the powering step."""
    V = np.ascontiguousarray((Gamma @ A.matrix).T)
    return CrossPolytope(V, scale=2.0 * rho)


def powering_check(n: int, m: int, rho: float, A: CoefficientMatrix,
                   outer_trials: int = 2000, inner_samples: int = 200_000,
                   rng_seed: int = 0) -> dict:
    """Estimate both sides of the conditional containment identity
    P(all columns in the body | exposed columns) =
    1{exposed columns in body} * gamma(body)^(number of fresh columns)."""
    if n > 4 or m > 10:
        raise InputError("need n <= 4 and m <= 10")
    if A.m != m or A.n != n:
        raise InputError("A must be m x n")
    Gamma = substream(rng_seed, 7, 0).standard_normal((n, m))
    exp = exposed(A, Gamma)
    body = _body(A, Gamma, rho)

    exposed_in = bool(np.all(hull_contains(body, exp.gamma_S.T))) \
        if exp.S else True
    N = exp.N_A

    successes = 0
    trials = int(outer_trials)
    if N == 0:
        successes = trials if exposed_in else 0
    else:
        fresh = substream(rng_seed, 7, 1).standard_normal((trials * N, n))
        inside = hull_contains(body, fresh).reshape(trials, N).all(axis=1)
        successes = int(inside.sum()) if exposed_in else 0
    lhs = successes / trials
    lhs_ci = clopper_pearson(successes, trials)

    inner_seed = int(substream(rng_seed, 7, 2).integers(2 ** 62))
    est = mc_measure(lambda pts: hull_contains(body, pts), n,
                     int(inner_samples), rng_seed=inner_seed)
    ind = 1.0 if exposed_in else 0.0
    rhs = ind * est.point ** N
    rhs_ci = (ind * est.ci_low ** N, ind * est.ci_high ** N)

    agree = max(lhs_ci[0], rhs_ci[0]) <= min(lhs_ci[1], rhs_ci[1])
    return {
        "lhs": lhs, "lhs_ci": lhs_ci,
        "rhs": rhs, "rhs_ci": rhs_ci,
        "gamma_hat": est.point, "exposed_in": exposed_in,
        "N_A": N, "S_size": len(exp.S),
        "outer_trials": trials, "inner_samples": int(inner_samples),
        "agree": bool(agree),
    }


def bridge_check(A: CoefficientMatrix, Gamma, rho: float, s: int,
                 samples: int = 500, rng_seed: int = 0,
                 tau_tol: float = 1e-8) -> dict:
    """Sample points of the containment body and certify each lies in the
    union of mixed cross-polytopes: its minimal l1 representation through
    W = [Gamma K | Gamma U] must cost at most 1, on an independent support
    extendable to a size-n index set."""
    n = A.n
    if n > 6:
        raise InputError("need n <= 6")
    Gamma = np.asarray(Gamma, dtype=np.float64)
    split = ku_split(A, s)
    W = np.hstack([Gamma @ split.K_part.matrix, Gamma @ split.U_part.matrix])
    GA = Gamma @ A.matrix

    violations = []
    max_tau = 0.0
    for i in range(int(samples)):
        xi = l1_ball_point(substream(rng_seed, i), n)
        target = (GA @ xi) / 2.0   # y / (4 rho) with y = 2 rho GA xi
        try:
            rep = min_l1_representation(W, target)
        except InfeasibleError:
            violations.append({"sample": i, "reason": "infeasible"})
            continue
        max_tau = max(max_tau, rep.tau)
        supp = list(rep.support)
        if len(supp) > n:
            violations.append({"sample": i, "reason": "support too large"})
            continue
        if supp and np.linalg.matrix_rank(W[:, supp]) < len(supp):
            violations.append({"sample": i, "reason": "dependent support"})
            continue
        if rep.tau > 1.0 + tau_tol:
            violations.append({"sample": i, "reason": "tau", "tau": rep.tau})
    I_example = sorted(set(range(2 * n)))[:n]
    return {
        "samples": int(samples), "rho": float(rho), "s": int(s),
        "max_tau": max_tau, "violations": violations,
        "holds": not violations, "index_set_size": len(I_example),
    }


def sample_u_class(rng, m: int, n: int, epsilon: float, s: int,
                   max_attempts: int = 100_000) -> np.ndarray:
    """Uniform-style draw from the short-vector class: support size uniform
    on [1, n], support uniform, entries uniform on the mesh within [-1, 1],
    rejected until the l2 constraint ||u||_2^2 <= 1/s holds."""
    K = int(math.floor(1.0 / epsilon))
    for _ in range(max_attempts):
        k = int(rng.integers(1, n + 1))
        supp = rng.choice(m, size=k, replace=False)
        vals = rng.integers(-K, K + 1, size=k) * epsilon
        if float((vals * vals).sum()) <= 1.0 / s:
            u = np.zeros(m)
            u[supp] = vals
            return u
    raise InputError("could not draw a class member within the attempt cap")


def u_norm_event_check(n: int, m: int, s: int, epsilon: float, rho: float,
                       trials: int = 200, rng_seed: int = 0,
                       C0: float = 4.0) -> dict:
    """Empirical failure rate of the global norm event ||Gamma u||_2 <= L
    with L = C0 sqrt((n/s) log(n rho)), against exp(-n log(n rho)/4)."""
    if n > 20:
        raise InputError("need n <= 20")
    if n * rho <= 1.0:
        raise InputError("need n * rho > 1")
    Lam = math.log(n * rho)
    L = C0 * math.sqrt(n / s * Lam)
    violations = 0
    max_norm = 0.0
    for trial in range(int(trials)):
        Gamma = substream(rng_seed, trial, 0).standard_normal((n, m))
        u = sample_u_class(substream(rng_seed, trial, 1), m, n, epsilon, s)
        norm = float(np.linalg.norm(Gamma @ u))
        max_norm = max(max_norm, norm)
        if norm > L:
            violations += 1
    rate = violations / trials
    bound = math.exp(-n * Lam / 4.0)
    se = math.sqrt(max(rate * (1 - rate), 0.0) / trials)
    return {
        "trials": int(trials), "violations": violations, "rate": rate,
        "L": L, "max_norm": max_norm, "bound": bound,
        "holds": bool(rate <= bound + 3.0 * se),
    }


def _bm_objective(T: np.ndarray, M: np.ndarray) -> float:
    """(max column l1 of T M) * (max over i of the min l1 cost of e_i)."""
    n = M.shape[0]
    TM = T @ M
    rho1 = float(np.abs(TM).sum(axis=0).max())
    rho2 = 0.0
    for i in range(n):
        try:
            rep = min_l1_representation(TM, np.eye(n)[i])
        except InfeasibleError:
            return math.inf
        rho2 = max(rho2, rep.tau)
    return rho1 * rho2


def bm_estimate(K: CrossPolytope, restarts: int = 32, rng_seed: int = 0,
                workers: int = 1) -> dict:
    """Heuristic upper bound on the multiplicative distance from K to the
    l1 ball: local search over invertible maps T, reported as `rho`.

    The value certifies T(K) is sandwiched between B_1^n and rho * B_1^n;
    no optimality is claimed.
    """
    from concurrent.futures import ThreadPoolExecutor

    from scipy.optimize import minimize

    n = K.dim
    if n > 4:
        raise InputError("need dim <= 4")
    M = np.ascontiguousarray(K.scale * K.generators.T)
    if np.linalg.matrix_rank(M) < n:
        raise InputError("polytope must be full-dimensional")

    bases = [np.eye(n)]
    if M.shape[1] >= n and abs(np.linalg.det(M[:, :n])) > 1e-12:
        bases.append(np.linalg.inv(M[:, :n]))
    cov = M @ M.T / M.shape[1]
    w, U = np.linalg.eigh(cov)
    if w.min() > 1e-12:
        bases.append(U @ np.diag(1.0 / np.sqrt(w)) @ U.T)

    def run(k):
        rng = substream(rng_seed, k)
        T0 = bases[k % len(bases)]
        if k >= len(bases):
            T0 = (np.eye(n) + 0.3 * rng.standard_normal((n, n))) @ T0
        if abs(np.linalg.det(T0)) < 1e-12:
            return math.inf, T0
        res = minimize(lambda x: _bm_objective(x.reshape(n, n), M),
                       T0.ravel(), method="Nelder-Mead",
                       options={"maxiter": 200 * n * n, "xatol": 1e-9,
                                "fatol": 1e-12})
        cand = res.x.reshape(n, n)
        vals = [(_bm_objective(T0, M), T0), (float(res.fun), cand)]
        return min(vals, key=lambda v: v[0])

    ks = list(range(int(restarts)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as ex:
            results = list(ex.map(run, ks))
    else:
        results = [run(k) for k in ks]
    best_val, best_T = math.inf, np.eye(n)
    for val, T in results:
        if val < best_val:
            best_val, best_T = val, T
    return {"rho": float(best_val), "witness": best_T.tolist(),
            "restarts": int(restarts)}

"""Cross-polytope geometry: hull types, Gram-Schmidt chains, volumes.

A cross polytope here is scale * conv{+-g_1, ..., +-g_ell} for an ordered
family of generators g_i in R^dim; the family may be larger or smaller than
the ambient dimension and need not be independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._hull import BACKEND, hull_distance_batch, hull_member_batch
from .errors import ConvergenceError, InputError

# Dependence decisions use max_column_norm * RANK_RTOL as the cutoff.
RANK_RTOL = 1e-10

# Conditional-gradient defaults: absolute tolerance 1e-9 * (1 + ||y||),
# iteration cap 1e5.
DEFAULT_MAX_ITER = 100_000


def hull_backend() -> str:
    """Name of the active hull-query backend ("cython" or "python")."""
    return BACKEND


def _as_matrix(vectors, name="vectors"):
    arr = np.ascontiguousarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"{name} must be a 2-d array of row vectors")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class CrossPolytope:
    """scale * conv{+-g_i} with generators as rows of a (ell, dim) array."""

    generators: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        gens = _as_matrix(self.generators, "generators")
        if gens.shape[0] < 1:
            raise InputError("need at least one generator")
        if not self.scale > 0:
            raise InputError("scale must be positive")
        gens.setflags(write=False)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    @property
    def num_generators(self) -> int:
        return self.generators.shape[0]

    def scaled(self, factor: float) -> "CrossPolytope":
        return CrossPolytope(self.generators, self.scale * float(factor))


@dataclass(frozen=True)
class ThickenedPolytope:
    """base + eta * (euclidean unit ball)."""

    base: CrossPolytope
    eta: float

    def __post_init__(self):
        if self.eta < 0:
            raise InputError("eta must be nonnegative")
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def dim(self) -> int:
        return self.base.dim


@dataclass(frozen=True)
class GramSchmidtChain:
    """Chain distances d_i = dist(x_i, span{x_1..x_{i-1}}) in a fixed order."""

    order: tuple
    distances: np.ndarray
    rank: int = field(default=0)

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "order", tuple(int(i) for i in self.order))


def rank_threshold(matrix) -> float:
    """Dependence cutoff for a family of row vectors."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.size == 0:
        return 0.0
    norms = np.sqrt((arr * arr).sum(axis=-1))
    return float(norms.max()) * RANK_RTOL


def gram_schmidt_chain(vectors, order=None) -> GramSchmidtChain:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    `vectors` is an (k, dim) array of row vectors; `order` optionally
    permutes them before the sweep. Every chain distance is recorded, also
    for vectors judged dependent (those do not extend the basis).
    """
    V = _as_matrix(vectors)
    k = V.shape[0]
    if order is None:
        order = tuple(range(k))
    else:
        order = tuple(int(i) for i in order)
        if sorted(order) != list(range(k)):
            raise InputError("order must be a permutation of range(k)")
    cutoff = rank_threshold(V)
    Q = np.zeros((0, V.shape[1]))
    distances = np.zeros(k)
    for pos, idx in enumerate(order):
        x = V[idx].copy()
        if Q.shape[0]:
            x -= Q.T @ (Q @ x)
            x -= Q.T @ (Q @ x)  # second pass controls cancellation error
        dist = float(np.linalg.norm(x))
        distances[pos] = dist
        if dist > cutoff:
            Q = np.vstack([Q, x / dist])
    return GramSchmidtChain(order=order, distances=distances, rank=Q.shape[0])


def cross_polytope_volume(generators, scale: float = 1.0) -> float:
    """Volume of scale * conv{+-y_1..+-y_d}: |det Y| * (2 scale)^d / d!."""
    if isinstance(generators, CrossPolytope):
        scale = scale * generators.scale
        generators = generators.generators
    Y = _as_matrix(generators, "generators")
    d = Y.shape[1]
    if Y.shape[0] != d:
        raise InputError("volume needs exactly d generators in R^d")
    det = abs(float(np.linalg.det(Y)))
    return det * (2.0 * scale) ** d / math.factorial(d)


def support_function(P: CrossPolytope, u) -> float:
    """h_P(u) = scale * max_i |<g_i, u>|."""
    u = np.asarray(u, dtype=np.float64)
    return P.scale * float(np.abs(P.generators @ u).max())


def project_polytope(P: CrossPolytope, basis) -> CrossPolytope:
    """Image of P under orthogonal projection onto span(basis columns).

    `basis` is (dim, k) with orthonormal columns (checked to 1e-12); the
    result lives in the basis coordinates of the subspace.
    """
    B = np.asarray(basis, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != P.dim:
        raise InputError("basis must be (dim, k)")
    gram = B.T @ B
    if np.abs(gram - np.eye(B.shape[1])).max() > 1e-12:
        raise InputError("basis columns must be orthonormal (tol 1e-12)")
    return CrossPolytope(P.generators @ B, P.scale)


def distance_to_hull(P: CrossPolytope, point, tol: float | None = None,
                     max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Euclidean distance from `point` to P, by away-step conditional gradient.

    Raises ConvergenceError carrying the best bounds if the iteration cap is
    reached before the bounds close to `tol` (default 1e-9 * (1 + ||y||)).
    """
    y = np.ascontiguousarray(point, dtype=np.float64).reshape(1, -1)
    if y.shape[1] != P.dim:
        raise InputError("point dimension mismatch")
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.linalg.norm(y)))
    ub, lb, iters, converged = hull_distance_batch(
        P.generators, y, P.scale, float(tol), int(max_iter))
    if not converged[0]:
        raise ConvergenceError(
            f"hull distance did not reach tol={tol:g} within {max_iter} steps",
            upper=float(ub[0]), lower=float(lb[0]), iterations=int(iters[0]))
    return float(ub[0])


def hull_contains(body, points, tol: float = 1e-9,
                  max_iter: int = DEFAULT_MAX_ITER) -> np.ndarray:
    """Boolean membership of each row of `points` in a (thickened) polytope.

    Membership means dist(y, base) <= eta + tol, with eta = 0 for a bare
    CrossPolytope.
    """
    if isinstance(body, ThickenedPolytope):
        base, eta = body.base, body.eta
    else:
        base, eta = body, 0.0
    pts = np.ascontiguousarray(points, dtype=np.float64)
    single = pts.ndim == 1
    if single:
        pts = pts.reshape(1, -1)
    if pts.shape[1] != base.dim:
        raise InputError("point dimension mismatch")
    member = None
    if eta == 0.0 and base.generators.shape[0] == base.dim:
        G = base.generators
        if np.linalg.cond(G) < 1e12:
            # square invertible family: y in scale*conv{+-g_i} iff the
            # unique coefficient vector has l1 norm at most 1
            coeff = np.linalg.solve(G.T, pts.T).T / base.scale
            member = np.abs(coeff).sum(axis=1) <= 1.0 + tol
    if member is None:
        member, _ = hull_member_batch(
            base.generators, pts, base.scale, float(eta), float(tol),
            int(max_iter))
    return bool(member[0]) if single else member


def minkowski_absorb_check(K: CrossPolytope, L: CrossPolytope, delta: float,
                           num_directions: int = 10_000, rng_seed: int = 0,
                           tol: float = 1e-9) -> dict:
    """Sampled-direction check of the absorption step K c L + delta*K =>
    K c (1-delta)^{-1} L, via support functions on random directions."""
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    if K.dim != L.dim:
        raise InputError("dimension mismatch")
    for name, P in (("K", K), ("L", L)):
        if np.linalg.matrix_rank(P.generators, tol=rank_threshold(P.generators)) < P.dim:
            raise InputError(f"{name} must be full-dimensional")
    from .rand import substream
    rng = substream(rng_seed)
    U = rng.standard_normal((int(num_directions), K.dim))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    hK = K.scale * np.abs(U @ K.generators.T).max(axis=1)
    hL = L.scale * np.abs(U @ L.generators.T).max(axis=1)
    premise = hK <= hL + delta * hK + tol
    conclusion = hK <= hL / (1.0 - delta) + tol
    violations = int(np.count_nonzero(premise & ~conclusion))
    worst = float((hK - hL / (1.0 - delta))[premise].max()) if premise.any() else 0.0
    return {
        "directions": int(num_directions),
        "premise_count": int(np.count_nonzero(premise)),
        "violations": violations,
        "max_excess": worst,
        "holds": violations == 0,
    }

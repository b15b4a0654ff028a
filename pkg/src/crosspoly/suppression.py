"""Random suppression of generator blocks and the block-tail experiment.

Suppressing a subset J of the first p generators means scaling them by
r/p. Averaging the containment indicator over all size-r subsets bounds
the Gaussian measure of the original polytope by suppressed ones at four
times the scale; at desk scale both sides are estimated by coupled Monte
Carlo so the inequality holds sample by sample.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InputError
from .gauss_mc import clopper_pearson
from .geometry import CrossPolytope, gram_schmidt_chain, hull_contains
from .rand import block_plan, substream

# failure-rate constant of the block-tail event, calibrated once by MC
BLOCK_TAIL_C = 1.0 / 16.0
C_DECAY_DEFAULT = math.log(2.0) / 8.0


@dataclass(frozen=True)
class SuppressedSpec:
    """Which generators were suppressed and by how much."""

    p: int
    q: int
    J: tuple
    factor: float

    def __post_init__(self):
        r = len(self.J)
        if not 1 <= r <= self.p:
            raise InputError("need 1 <= |J| <= p")
        if self.q < 0:
            raise InputError("q must be nonnegative")
        if not 0.0 < self.factor <= 1.0:
            raise InputError("factor must lie in (0, 1]")
        if any(not 0 <= j < self.p for j in self.J):
            raise InputError("J must index the first p generators")
        if len(set(self.J)) != r:
            raise InputError("J must not repeat indices")


@dataclass(frozen=True)
class BlockTailReport:
    """Tail span-distances of one trial against the threshold tau*sqrt(N)."""

    N: int
    tau: float
    good_count: int
    threshold: float
    distances: tuple

    @property
    def event(self) -> bool:
        return 2 * self.good_count >= len(self.distances)


def suppress(P: CrossPolytope, p: int, J, r: int) -> CrossPolytope:
    """Scale the generators indexed by J (inside the leading p block) by r/p."""
    J = tuple(int(j) for j in J)
    if len(J) != r:
        raise InputError(f"|J| = {len(J)} but r = {r}")
    spec = SuppressedSpec(p=int(p), q=P.num_generators - int(p), J=J,
                          factor=r / p)
    gens = P.generators.copy()
    gens[list(J)] *= spec.factor
    return CrossPolytope(gens, scale=P.scale)


def _measure_pair(polytopes, dim, samples, rng_seed, tol):
    """Coupled hit counts for several polytopes on the same Gaussian draws."""
    counts = np.zeros(len(polytopes), dtype=np.int64)
    for b, length in block_plan(int(samples)):
        pts = substream(rng_seed, b).standard_normal((length, dim))
        for i, poly in enumerate(polytopes):
            counts[i] += int(np.count_nonzero(hull_contains(poly, pts, tol=tol)))
    return counts


def verify_suppression_inequality(P: CrossPolytope, p: int, r: int, t: float,
                                  mc_samples: int = 10 ** 6, rng_seed: int = 0,
                                  membership_tol: float = 1e-9) -> dict:
    """Check gamma(tP) <= (2/binom(p,r)) * sum_J gamma(4t P_J) by coupled MC
    over every size-r subset J of the leading block."""
    dim = P.dim
    if dim > 10:
        raise InputError("dimension must be at most 10")
    if not 1 <= r <= p <= P.num_generators:
        raise InputError("need 1 <= r <= p <= number of generators")
    n_subsets = math.comb(p, r)
    if n_subsets > 10 ** 4:
        raise InputError("binom(p, r) must be at most 10^4")

    if np.linalg.matrix_rank(P.generators) < dim:
        # lower-dimensional body: both sides are 0
        return {"lhs": 0.0, "rhs": 0.0, "holds": True, "degenerate": True,
                "samples": 0, "subsets": n_subsets}

    subsets = [tuple(J) for J in itertools.combinations(range(p), r)]
    bodies = [P.scaled(t)] + [suppress(P, p, J, r).scaled(4.0 * t)
                              for J in subsets]
    counts = _measure_pair(bodies, dim, mc_samples, rng_seed, membership_tol)
    samples = int(mc_samples)
    lhs = counts[0] / samples
    term_points = counts[1:] / samples
    rhs = float(2.0 / n_subsets * term_points.sum())

    se_lhs = math.sqrt(max(lhs * (1 - lhs), 0.0) / samples)
    se_terms = np.sqrt(np.maximum(term_points * (1 - term_points), 0.0) / samples)
    se_rhs = 2.0 / n_subsets * math.sqrt(float((se_terms ** 2).sum()) * n_subsets)
    se = math.sqrt(se_lhs ** 2 + se_rhs ** 2)

    return {
        "lhs": float(lhs), "rhs": rhs, "se": se,
        "holds": bool(lhs <= rhs + 3.0 * se),
        "degenerate": False, "samples": samples, "subsets": n_subsets,
        "lhs_ci": clopper_pearson(int(counts[0]), samples),
    }


def block_order(p: int, J) -> np.ndarray:
    """The ordering that defers J: [p] minus J increasing, then J increasing."""
    J = sorted(int(j) for j in J)
    head = [i for i in range(p) if i not in set(J)]
    return np.array(head + J, dtype=int)


def block_tail_experiment(n: int, p: int, r: int, tau: float, B, J,
                          trials: int, rng_seed: int = 0) -> list:
    """Per trial: draw an n x m Gaussian, form H = Gamma B, order columns by
    the J-deferring permutation, and count tail span-distances below
    tau * sqrt(N) with N = n - p + r."""
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[1] != p:
        raise InputError("B must be m x p")
    m = B.shape[0]
    if not (n / 2 <= p <= n):
        raise InputError("need n/2 <= p <= n")
    if not 1 <= r <= p / 2:
        raise InputError("need 1 <= r <= p/2")
    col_norms = np.linalg.norm(B, axis=0)
    if col_norms.max() > 1.0 + 1e-12:
        raise InputError("columns of B must have l2 norm at most 1")
    if np.linalg.matrix_rank(B) < p:
        raise InputError("B must have full column rank")
    J = tuple(sorted(int(j) for j in J))
    if not 1 <= len(J) <= p or any(not 0 <= j < p for j in J):
        raise InputError("J must be a nonempty subset of [p]")
    if len(J) != r:
        raise InputError(f"|J| = {len(J)} but r = {r}")

    order = block_order(p, J)
    N = n - p + r
    threshold = tau * math.sqrt(N)
    reports = []
    for trial in range(int(trials)):
        Gamma = substream(rng_seed, trial).standard_normal((n, m))
        H = Gamma @ B
        chain = gram_schmidt_chain(H.T[order])
        tail = chain.distances[p - r:]
        good = int(np.count_nonzero(tail <= threshold))
        reports.append(BlockTailReport(
            N=N, tau=float(tau), good_count=good, threshold=threshold,
            distances=tuple(float(v) for v in tail)))
    return reports


def block_tail_failure_bound(tau: float, N: int, r: int,
                             c: float = BLOCK_TAIL_C) -> float:
    """exp(-c tau^2 N r), the per-(B, J) failure-probability form."""
    return math.exp(-c * tau * tau * N * r)


def suppression_measure_bound(P: CrossPolytope, p: int, rho: float, r: int,
                              C_star: float = 1.0, c_suppr: float = 1.0,
                              c_decay: float = C_DECAY_DEFAULT,
                              hypothesis_verified: bool = False) -> dict:
    """Exponential measure bound 2 exp(-c_decay r) for suppressed polytopes
    whose Gram-Schmidt tail hypothesis has been established, gated by the
    scale condition 4 rho C_star sqrt(r) <= c_suppr n."""
    n = P.dim
    if not 8 <= r <= p:
        raise InputError("need 8 <= r <= p")
    if not p >= n / 2:
        raise InputError("need p >= n/2")
    if not hypothesis_verified:
        raise ContractError(
            "Gram-Schmidt tail hypothesis must be verified before applying "
            "the measure bound")
    applicable = bool(4.0 * rho * C_star * math.sqrt(r) <= c_suppr * n)
    return {
        "bound": float(2.0 * math.exp(-c_decay * r)),
        "applicable": applicable,
        "r": int(r),
        "scale_lhs": float(4.0 * rho * C_star * math.sqrt(r)),
        "scale_rhs": float(c_suppr * n),
    }

"""Minimum-l1 representations via a self-contained revised simplex.

Solving min ||x||_1 subject to Mx = y as the LP min 1'z, [M -M]z = y,
z >= 0 returns a vertex of the feasible polyhedron, which is exactly the
structure the sparse-representation lemma needs: support of size at most
rank(M), linearly independent support columns, and no index carrying both
a positive and a negative part.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InputError, NumericalError

FEAS_RTOL = 1e-8
_RC_TOL = 1e-10
_ZERO_CLIP = 1e-11


@dataclass(frozen=True)
class SparseRep:
    """Coefficients x with Mx = y, support indices, and tau = ||x||_1."""

    coefficients: np.ndarray
    support: tuple
    tau: float

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        object.__setattr__(self, "tau", float(self.tau))


def _pivot(A, b, c, basis, max_pivots):
    """Revised simplex from a feasible basis; Dantzig pricing, Bland fallback.

    Returns (basic values, basis). The Bland switch guarantees termination;
    exceeding the pivot cap afterwards is reported as a numerical failure.
    """
    r, ncols = A.shape
    basis = list(basis)
    bland_after = 50 * (ncols + r) + 200
    for pivot_count in range(max_pivots):
        B = A[:, basis]
        try:
            xB = np.linalg.solve(B, b)
            dual = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError as e:
            raise NumericalError("singular working basis") from e
        rc = c - dual @ A
        rc[basis] = 0.0
        if pivot_count >= bland_after:
            cand = np.flatnonzero(rc < -_RC_TOL)
            if cand.size == 0:
                return xB, basis
            enter = int(cand[0])
        else:
            enter = int(np.argmin(rc))
            if rc[enter] >= -_RC_TOL:
                return xB, basis
        d = np.linalg.solve(B, A[:, enter])
        pos = d > 1e-12
        if not pos.any():
            raise NumericalError("unbounded pivot direction in a bounded l1 program")
        ratios = np.where(pos, xB / np.where(pos, d, 1.0), np.inf)
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + 1e-12 * (1.0 + abs(rmin)))
        leave = min(ties, key=lambda i: basis[i])
        basis[leave] = enter
    raise NumericalError("simplex pivot cap exceeded (cycling guard tripped)")


def _solve_standard_form(A, b, max_pivots):
    """min 1'z, Az = b, z >= 0 for full-row-rank A; returns optimal z."""
    r, n2 = A.shape
    flip = b < 0
    A = A.copy()
    b = b.copy()
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial identity basis
    A1 = np.hstack([A, np.eye(r)])
    c1 = np.concatenate([np.zeros(n2), np.ones(r)])
    basis = list(range(n2, n2 + r))
    xB, basis = _pivot(A1, b, c1, basis, max_pivots)
    art_mass = sum(v for v, j in zip(xB, basis) if j >= n2)
    if art_mass > 1e-9 * (1.0 + float(np.abs(b).sum())):
        raise InfeasibleError("phase 1 ended with positive artificial mass")
    # drive remaining zero-level artificials out of the basis
    for i in range(r):
        if basis[i] >= n2:
            row = np.linalg.solve(A1[:, basis], A)[i]
            in_basis = set(basis)
            cand = [j for j in range(n2)
                    if j not in in_basis and abs(row[j]) > 1e-9]
            if not cand:
                raise NumericalError("could not displace an artificial variable")
            basis[i] = cand[0]

    c2 = np.ones(n2)
    xB, basis = _pivot(A, b, c2, basis, max_pivots)
    z = np.zeros(n2)
    for v, j in zip(xB, basis):
        z[j] = max(v, 0.0)
    return z


def min_l1_representation(M, y, feas_tol: float = FEAS_RTOL,
                          max_pivots: int = 20_000) -> SparseRep:
    """Sparse minimum-l1 solution of Mx = y.

    The returned vertex satisfies |support| <= rank(M), has linearly
    independent support columns, and no coordinate splits into cancelling
    positive and negative parts. Raises InfeasibleError when y is not in
    the column span (relative tolerance `feas_tol`).
    """
    M = np.asarray(M, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if M.ndim != 2 or M.shape[0] != y.shape[0]:
        raise InputError("M must be (p, N) with y of length p")
    p, N = M.shape
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(y))):
        raise InputError("inputs must be finite")
    if N == 0 or not np.any(y):
        if np.linalg.norm(y) > feas_tol:
            raise InfeasibleError("no columns to represent a nonzero target")
        return SparseRep(np.zeros(N), (), 0.0)

    x_ls, *_ = np.linalg.lstsq(M, y, rcond=None)
    resid = float(np.linalg.norm(M @ x_ls - y))
    if resid > feas_tol * (1.0 + float(np.linalg.norm(y))):
        raise InfeasibleError(
            f"y is outside the column span (residual {resid:.3e})")

    # reduce to full row rank; the feasible set is unchanged for consistent y
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.count_nonzero(s > s[0] * 1e-12)) if s.size else 0
    if rank == 0:
        raise InfeasibleError("zero matrix cannot represent a nonzero target")
    A = U[:, :rank].T @ M
    b = U[:, :rank].T @ y

    z = _solve_standard_form(np.hstack([A, -A]), b, max_pivots)
    x = z[:N] - z[N:]
    clip = _ZERO_CLIP * max(1.0, float(np.abs(x).max()))
    x[np.abs(x) <= clip] = 0.0
    support = tuple(int(i) for i in np.flatnonzero(x))
    return SparseRep(x, support, float(np.abs(x).sum()))


def membership_l1(M, y, budget: float, feas_tol: float = FEAS_RTOL):
    """Is y in budget * M(B_1^N)? Returns (bool, SparseRep or None).

    Infeasible targets (outside the column span) are non-members with a
    None certificate.
    """
    if budget < 0:
        raise InputError("budget must be nonnegative")
    try:
        rep = min_l1_representation(M, y, feas_tol=feas_tol)
    except InfeasibleError:
        return False, None
    return rep.tau <= budget + 1e-8, rep


def brute_force_min_l1(M, y, feas_tol: float = FEAS_RTOL,
                       max_subsets: int = 200_000):
    """Reference oracle: enumerate candidate supports up to rank(M).

    Returns (tau, support, coefficients) of the best representation found.
    Exhaustive over independent column subsets, so only usable for small
    systems; the subset count is capped at `max_subsets`.
    """
    M = np.asarray(M, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    p, N = M.shape
    if not np.any(y):
        return 0.0, (), np.zeros(N)
    rank = np.linalg.matrix_rank(M)
    total = sum(math.comb(N, k) for k in range(1, rank + 1))
    if total > max_subsets:
        raise InputError(f"too many subsets to enumerate ({total})")
    ynorm = float(np.linalg.norm(y))
    best = (np.inf, (), np.zeros(N))
    for k in range(1, rank + 1):
        for sub in itertools.combinations(range(N), k):
            Ms = M[:, sub]
            xs, *_ = np.linalg.lstsq(Ms, y, rcond=None)
            if float(np.linalg.norm(Ms @ xs - y)) > feas_tol * (1.0 + ynorm):
                continue
            tau = float(np.abs(xs).sum())
            if tau < best[0]:
                full = np.zeros(N)
                full[list(sub)] = xs
                best = (tau, sub, full)
    if not np.isfinite(best[0]):
        raise InfeasibleError("no feasible support found")
    return best


def l1_decomposition_cover_check(M, samples: int = 100, rng_seed: int = 0) -> dict:
    """Sample y in M(B_1^N) and confirm the rank-aware decomposition:
    the minimizing support is independent, of size at most rank(M), and
    carries y with l1 budget 1."""
    from .rand import l1_ball_point, substream

    M = np.asarray(M, dtype=np.float64)
    p, N = M.shape
    if N > 24 or p > 12:
        raise InputError("cover check is desk-scale only (N <= 24, p <= 12)")
    rank = int(np.linalg.matrix_rank(M))
    rng = substream(rng_seed)
    violations = 0
    max_tau = 0.0
    max_support = 0
    for _ in range(int(samples)):
        a = l1_ball_point(rng, N)
        y = M @ a
        rep = min_l1_representation(M, y)
        ok = rep.tau <= 1.0 + 1e-8 and len(rep.support) <= rank
        if rep.support:
            sv = np.linalg.svd(M[:, list(rep.support)], compute_uv=False)
            ok = ok and sv[-1] > sv[0] * 1e-10
        violations += 0 if ok else 1
        max_tau = max(max_tau, rep.tau)
        max_support = max(max_support, len(rep.support))
    return {
        "samples": int(samples),
        "rank": rank,
        "violations": violations,
        "max_tau": max_tau,
        "max_support_size": max_support,
        "holds": violations == 0,
    }

"""Empirical sparsification of hull points and the derived union-inclusion
reduction.

A point y = sum a_i x_i with ||a||_1 <= 1 is replaced by an average of t
i.i.d. signed atoms drawn with P(xi = sgn(a_i) x_i) = |a_i| and a zero atom
carrying the remaining mass. The mean square error is at most L^2/t for
L = max ||x_i||_2, so retrying against the threshold slack * L / sqrt(t)
succeeds with probability at least 1 - 1/slack^2 per draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, MaureyFailure
from .rand import l1_ball_point, substream

DEFAULT_RETRY_BUDGET = 64


@dataclass(frozen=True)
class MaureyResult:
    """Sparse hull point with its l1-bounded coefficient certificate."""

    subset: tuple          # indices into the input family, |subset| <= t
    point: np.ndarray      # z in the hull of {+-x_i : i in subset}
    achieved_distance: float
    coefficients: np.ndarray  # per-subset-index weights, ||.||_1 <= 1
    attempts: int


def _validate_family(points):
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError("points must be a nonempty (N, d) array")
    return X


def maurey_sparsify(points, coefficients, t: int, slack: float = 2.0,
                    rng_seed: int = 0,
                    retry_budget: int = DEFAULT_RETRY_BUDGET) -> MaureyResult:
    """Find z in the hull of at most t of the signed points with
    ||z - y||_2 <= slack * L / sqrt(t), y = points.T @ coefficients."""
    X = _validate_family(points)
    N, d = X.shape
    a = np.asarray(coefficients, dtype=np.float64)
    if a.shape != (N,):
        raise InputError("coefficients must have one entry per point")
    mass = float(np.abs(a).sum())
    if mass > 1.0 + 1e-12:
        raise InputError("coefficient l1 norm must be at most 1")
    t = int(t)
    if t < 1:
        raise InputError("t must be a positive integer")
    L = float(np.sqrt((X * X).sum(axis=1)).max())
    y = a @ X
    threshold = slack * L / math.sqrt(t)

    if mass <= 0.0:
        # zero target: any singleton subset with weight 0 certifies it
        return MaureyResult(subset=(0,), point=np.zeros(d),
                            achieved_distance=float(np.linalg.norm(y)),
                            coefficients=np.zeros(1), attempts=0)

    probs = np.empty(N + 1)
    probs[:N] = np.abs(a)
    probs[N] = max(1.0 - mass, 0.0)
    probs /= probs.sum()
    signs = np.sign(a)

    best = None
    for attempt in range(int(retry_budget)):
        rng = substream(rng_seed, attempt)
        draws = rng.choice(N + 1, size=t, p=probs)
        hit = draws < N
        # net signed multiplicity of each atom, divided by t
        weights = np.zeros(N)
        np.add.at(weights, draws[hit], signs[draws[hit]])
        weights /= t
        z = weights @ X
        dist = float(np.linalg.norm(z - y))
        if best is None or dist < best[0]:
            support = tuple(int(i) for i in np.flatnonzero(weights != 0.0))
            best = (dist, support, z, weights)
        if dist <= threshold:
            dist, support, z, weights = best
            return MaureyResult(subset=support, point=z,
                                achieved_distance=dist,
                                coefficients=weights[list(support)],
                                attempts=attempt + 1)
    raise MaureyFailure(
        f"no draw reached {threshold:.6g} within {retry_budget} attempts",
        best_distance=best[0], attempts=int(retry_budget))


def maurey_parameters(k: int, Lambda: float, L: float) -> tuple:
    """Sparsification size t = ceil(k / Lambda) and radius r0 = L / sqrt(t)."""
    if k < 1:
        raise InputError("k must be at least 1")
    if Lambda < 1:
        raise InputError("Lambda must be at least 1")
    t = math.ceil(k / Lambda)
    return t, L / math.sqrt(t)


def union_inclusion_check(points, k: int, t: int, trials: int,
                          slack: float = 2.0, rng_seed: int = 0,
                          distance_tol: float = 1e-7) -> dict:
    """For random (I, y) with |I| = k and y in the hull Q_I, certify a subset
    S of I with |S| = t and dist(y, Q_S) <= slack * L / sqrt(t).

    S is padded up to exactly t elements with the lowest unused indices of
    I. Each certificate is re-verified with the hull-distance solver.
    """
    from .geometry import CrossPolytope, distance_to_hull

    X = _validate_family(points)
    N = X.shape[0]
    if not 1 <= t <= k <= N:
        raise InputError("need 1 <= t <= k <= n")
    L = float(np.sqrt((X * X).sum(axis=1)).max())
    threshold = slack * L / math.sqrt(t)

    failures = []
    distances = []
    for trial in range(int(trials)):
        rng = substream(rng_seed, trial)
        I = np.sort(rng.choice(N, size=k, replace=False))
        a_I = l1_ball_point(rng, k)
        y = a_I @ X[I]
        if t == k:
            S = I
            dist = 0.0
        else:
            res = maurey_sparsify(X[I], a_I, t, slack=slack,
                                  rng_seed=(rng_seed << 20) ^ trial)
            S_local = list(res.subset)
            for idx in range(k):
                if len(S_local) >= t:
                    break
                if idx not in S_local:
                    S_local.append(idx)
            S = I[np.sort(np.array(S_local, dtype=int))]
            dist = distance_to_hull(CrossPolytope(X[S]), y)
        distances.append(dist)
        if dist > threshold + distance_tol:
            failures.append({"trial": trial, "distance": dist})
    return {
        "trials": int(trials), "k": int(k), "t": int(t),
        "threshold": threshold,
        "max_distance": max(distances) if distances else 0.0,
        "failures": failures,
        "holds": not failures,
    }

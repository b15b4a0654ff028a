"""Gaussian-measure Monte Carlo and the matching closed-form bounds.

All estimators draw standard Gaussian samples in fixed-size blocks with one
substream per block, so estimates depend on the seed alone and not on how
blocks are distributed over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InputError
from .rand import BLOCK_SIZE, block_plan, substream

CONFIDENCE = 0.99


@dataclass(frozen=True)
class MCEstimate:
    """Hit-count estimate with a two-sided Clopper-Pearson 99% interval."""

    hits: int
    samples: int
    point: float
    ci_low: float
    ci_high: float

    @property
    def se(self) -> float:
        """Binomial standard error at the point estimate."""
        p = self.point
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.samples)


def clopper_pearson(hits: int, samples: int,
                    confidence: float = CONFIDENCE) -> tuple:
    """Exact binomial confidence interval."""
    if not 0 <= hits <= samples or samples <= 0:
        raise InputError("need 0 <= hits <= samples, samples > 0")
    alpha = 1.0 - confidence
    lo = 0.0 if hits == 0 else float(stats.beta.ppf(alpha / 2, hits, samples - hits + 1))
    hi = 1.0 if hits == samples else float(stats.beta.ppf(1 - alpha / 2, hits + 1, samples - hits))
    return lo, hi


def _estimate(hits: int, samples: int) -> MCEstimate:
    lo, hi = clopper_pearson(hits, samples)
    return MCEstimate(hits=int(hits), samples=int(samples),
                      point=hits / samples, ci_low=lo, ci_high=hi)


def _run_blocks(worker, blocks, workers):
    if workers <= 1:
        return [worker(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=int(workers)) as ex:
        return list(ex.map(worker, blocks))


def mc_measure(membership, dim: int, samples: int, rng_seed: int = 0,
               workers: int = 1, block_size: int = BLOCK_SIZE) -> MCEstimate:
    """Estimate gamma_dim(S) for S given by a vectorized point predicate.

    `membership` receives a (B, dim) block of standard Gaussian rows and
    must return a boolean vector of length B. Identical seeds give
    identical hit counts for every worker count.
    """
    samples = int(samples)
    if samples < 100 or samples > 10 ** 9:
        raise InputError("samples must be in [100, 1e9]")
    if not 1 <= dim <= 50:
        raise InputError("dim must be in [1, 50]")
    blocks = list(block_plan(samples, block_size))

    def run(block):
        b, length = block
        pts = substream(rng_seed, b).standard_normal((length, dim))
        try:
            res = np.asarray(membership(pts))
        except Exception as e:
            raise RuntimeError(
                f"membership predicate failed on samples "
                f"[{b * block_size}, {b * block_size + length})") from e
        if res.shape != (length,):
            raise InputError("membership must return one boolean per sample")
        return int(np.count_nonzero(res))

    hits = sum(_run_blocks(run, blocks, workers))
    return _estimate(hits, samples)


def crosspoly_measure_bound(rho: float, R: float, d: int) -> float:
    """Closed-form bound on gamma_d(rho * conv{+-y_i}) for d generators of
    norm at most R: ((2e rho R) / (sqrt(2 pi) d))^d."""
    if rho < 1 or R < 0 or d < 1:
        raise InputError("need rho >= 1, R >= 0, d >= 1")
    return float((2.0 * math.e * rho * R / (math.sqrt(2.0 * math.pi) * d)) ** d)


def thickening_bound(rho: float, R: float, eta: float, d: int, ell: int) -> float:
    """Bound on gamma_d(rho * (P + eta B_2^d)) for P with ell generators of
    norm at most R: binom(ell+d, d) * (C rho (R + eta sqrt(d)) / d)^d with
    C = 4e/sqrt(2 pi) (the factor-2 hull absorption made explicit)."""
    if rho < 1 or R < 0 or eta < 0 or d < 1 or ell < 1:
        raise InputError("need rho >= 1, R >= 0, eta >= 0, d >= 1, ell >= 1")
    C = 4.0 * math.e / math.sqrt(2.0 * math.pi)
    return float(math.comb(ell + d, d)
                 * (C * rho * (R + eta * math.sqrt(d)) / d) ** d)


def gaussian_norm_tail_check(n: int, t_values, samples: int, rng_seed: int = 0,
                             workers: int = 1) -> dict:
    """Empirical check of both Gaussian-norm tails on coupled draws:
    P(||G|| >= sqrt(n) + t) <= exp(-t^2/2) and
    P(||G|| >= 2 sqrt(n + t)) <= exp(-t)."""
    if not 1 <= n <= 100:
        raise InputError("n must be in [1, 100]")
    t_values = [float(t) for t in t_values]
    samples = int(samples)
    blocks = list(block_plan(samples))

    def run(block):
        b, length = block
        norms = np.sqrt(substream(rng_seed, b).chisquare(n, length))
        c1 = [int(np.count_nonzero(norms >= math.sqrt(n) + t)) for t in t_values]
        c2 = [int(np.count_nonzero(norms >= 2.0 * math.sqrt(n + t))) for t in t_values]
        return c1, c2

    parts = _run_blocks(run, blocks, workers)
    entries = []
    all_ok = True
    for i, t in enumerate(t_values):
        e1 = _estimate(sum(p[0][i] for p in parts), samples)
        e2 = _estimate(sum(p[1][i] for p in parts), samples)
        b1 = math.exp(-t * t / 2.0)
        b2 = math.exp(-t)
        ok1 = e1.point <= b1 + 3.0 * e1.se
        ok2 = e2.point <= b2 + 3.0 * e2.se
        all_ok = all_ok and ok1 and ok2
        entries.append({
            "t": t,
            "lipschitz_empirical": e1.point, "lipschitz_bound": b1, "lipschitz_ok": ok1,
            "doubled_empirical": e2.point, "doubled_bound": b2, "doubled_ok": ok2,
        })
    return {"n": int(n), "samples": samples, "entries": entries, "holds": all_ok}


def chi_square_tail_check(n: int, t_values, samples: int, rng_seed: int = 0,
                          workers: int = 1) -> dict:
    """Empirical check of P(X - n >= 2 sqrt(n t) + 2 t) <= exp(-t), X ~ chi^2_n."""
    t_values = [float(t) for t in t_values]
    samples = int(samples)
    blocks = list(block_plan(samples))
    thresholds = [n + 2.0 * math.sqrt(n * t) + 2.0 * t for t in t_values]

    def run(block):
        b, length = block
        x = substream(rng_seed, b).chisquare(n, length)
        return [int(np.count_nonzero(x >= thr)) for thr in thresholds]

    parts = _run_blocks(run, blocks, workers)
    entries = []
    all_ok = True
    for i, t in enumerate(t_values):
        est = _estimate(sum(p[i] for p in parts), samples)
        bound = math.exp(-t)
        ok = est.point <= bound + 3.0 * est.se
        all_ok = all_ok and ok
        entries.append({"t": t, "empirical": est.point, "bound": bound,
                        "ci_high": est.ci_high, "ok": ok})
    return {"n": int(n), "samples": samples, "entries": entries, "holds": all_ok}


def projection_monotonicity_check(membership, proj_membership, basis, dim: int,
                                  samples: int, rng_seed: int = 0,
                                  workers: int = 1) -> dict:
    """Coupled-draw check of gamma_n(S) <= gamma_H(pi_H S).

    Every Gaussian draw is evaluated by both predicates; `proj_membership`
    receives the draw's coordinates in the orthonormal `basis` of H.
    """
    B = np.asarray(basis, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != dim:
        raise InputError("basis must be (dim, k)")
    if np.abs(B.T @ B - np.eye(B.shape[1])).max() > 1e-12:
        raise InputError("basis columns must be orthonormal")
    samples = int(samples)
    blocks = list(block_plan(samples))

    def run(block):
        b, length = block
        G = substream(rng_seed, b).standard_normal((length, dim))
        full = np.asarray(membership(G), dtype=bool)
        proj = np.asarray(proj_membership(G @ B), dtype=bool)
        return int(full.sum()), int(proj.sum())

    parts = _run_blocks(run, blocks, workers)
    est_full = _estimate(sum(p[0] for p in parts), samples)
    est_proj = _estimate(sum(p[1] for p in parts), samples)
    se = math.sqrt(est_full.se ** 2 + est_proj.se ** 2)
    holds = est_full.point <= est_proj.point + 3.0 * se
    return {
        "samples": samples,
        "full_point": est_full.point,
        "projected_point": est_proj.point,
        "se": se,
        "holds": holds,
    }


def binom_bound_check(n_max: int = 60) -> dict:
    """Exact integer verification of binom(n, r) <= (e n / r)^r over
    1 <= r <= n <= n_max.

    e is replaced by a rational lower bound, which only weakens the
    right-hand side, so every pass certifies the true inequality.
    """
    from fractions import Fraction

    if not 1 <= n_max <= 200:
        raise InputError("n_max must be in [1, 200]")
    e_lower = Fraction(271828182845904523, 10 ** 17)
    failures = []
    checked = 0
    for n in range(1, n_max + 1):
        for r in range(1, n + 1):
            checked += 1
            if math.comb(n, r) > (e_lower * n / r) ** r:
                failures.append((n, r))
    return {"n_max": int(n_max), "checked": checked,
            "failures": failures, "holds": not failures}


def det_shrink_check(n: int, d: int, h: float, mc_samples: int = 200_000,
                     rng_seed: int = 0, workers: int = 1) -> dict:
    """Construct a polytope whose last d Gram-Schmidt chain distances are at
    most h and verify gamma_n(P) <= ((2e h)/(sqrt(2 pi) d))^d by MC.

    The head generators are standard Gaussian; each tail generator is a
    random combination of its predecessors plus a residual of norm in
    (h/2, h] along a fresh orthogonal direction, so the chain tail is
    controlled exactly.
    """
    if not (1 <= d <= n):
        raise InputError("need 1 <= d <= n")
    if h <= 0:
        raise InputError("h must be positive")
    from .geometry import gram_schmidt_chain

    rng = substream(rng_seed, 0xD5)
    head = rng.standard_normal((n - d, n))
    gens = np.zeros((n, n))
    gens[: n - d] = head
    for i in range(n - d, n):
        mix = rng.standard_normal(i) @ gens[:i] if i else np.zeros(n)
        # residual direction orthogonal to everything placed so far
        q, _ = np.linalg.qr(gens[:i].T, mode="complete")
        direction = q[:, i]
        gens[i] = mix + rng.uniform(0.5 * h, h) * direction
    chain = gram_schmidt_chain(gens)
    tail = chain.distances[n - d:]
    if tail.max() > h * (1 + 1e-9):
        raise InputError("tail construction failed to stay under h")

    Xinv = np.linalg.inv(gens.T)  # membership: ||X^{-1} y||_1 <= 1

    def member(pts):
        return np.abs(pts @ Xinv.T).sum(axis=1) <= 1.0

    est = mc_measure(member, n, mc_samples, rng_seed=rng_seed, workers=workers)
    bound = (2.0 * math.e * h / (math.sqrt(2.0 * math.pi) * d)) ** d
    holds = est.point <= bound + 3.0 * est.se
    return {
        "n": int(n), "d": int(d), "h": float(h),
        "tail_distances": [float(v) for v in tail],
        "measure": est.point, "bound": float(bound),
        "se": est.se, "holds": holds,
    }

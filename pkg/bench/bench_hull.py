"""Benchmark the compiled hull kernel against the numpy fallback.

Runs the batch membership and batch distance queries used by the Monte
Carlo estimators over a grid of (generators, dimension, points) shapes and
prints per-backend timings with the speedup ratio. Both backends must
return identical memberships; distances must agree to the closing
tolerance, otherwise the run aborts.

Usage: python3 bench/bench_hull.py [--points N] [--repeats K]
"""

import argparse
import time

import numpy as np

from crosspoly._hull import fallback
from crosspoly.rand import substream

try:
    from crosspoly._hull import _fwcore
except ImportError:
    _fwcore = None

SHAPES = [
    (4, 2),
    (6, 3),
    (8, 4),
    (16, 4),
    (12, 6),
    (27, 3),
    (32, 8),
]


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run(points, repeats):
    if _fwcore is None:
        print("compiled kernel not built; nothing to compare")
        return
    tol = 1e-9
    print(f"{'shape':>10} {'query':>10} {'cython':>10} {'numpy':>10} "
          f"{'speedup':>8}")
    for k, d in SHAPES:
        rng = substream(1234, k, d)
        G = np.ascontiguousarray(rng.standard_normal((k, d)))
        pts = np.ascontiguousarray(rng.standard_normal((points, d)))

        tc, (mc, _) = _time(
            lambda: _fwcore.hull_member_batch(G, pts, 1.0, tol, 1e-10, 20000),
            repeats)
        tp, (mp, _) = _time(
            lambda: fallback.hull_member_batch(G, pts, 1.0, tol, 1e-10, 20000),
            repeats)
        if not np.array_equal(np.asarray(mc, bool), np.asarray(mp, bool)):
            raise SystemExit(f"membership mismatch at shape ({k},{d})")
        print(f"{k:>6}x{d:<3} {'member':>10} {tc * 1e3:>8.1f}ms "
              f"{tp * 1e3:>8.1f}ms {tp / tc:>7.1f}x")

        sub = pts[: max(64, points // 16)]
        tc, (ubc, lbc, _, convc) = _time(
            lambda: _fwcore.hull_distance_batch(G, sub, 1.0, 1e-10, 50000),
            repeats)
        tp, (ubp, lbp, _, convp) = _time(
            lambda: fallback.hull_distance_batch(G, sub, 1.0, 1e-10, 50000),
            repeats)
        # points that hit the iteration cap return best-so-far bounds; only
        # converged-in-both points carry the agreement guarantee
        both = np.asarray(convc, bool) & np.asarray(convp, bool)
        scale = 1.0 + np.linalg.norm(sub, axis=1)
        diff = np.abs(np.asarray(ubc) - np.asarray(ubp))
        if (diff[both] > 5e-10 * scale[both]).any():
            raise SystemExit(f"distance mismatch at shape ({k},{d})")
        capped = int((~both).sum())
        note = f"  ({capped} hit iter cap)" if capped else ""
        print(f"{k:>6}x{d:<3} {'distance':>10} {tc * 1e3:>8.1f}ms "
              f"{tp * 1e3:>8.1f}ms {tp / tc:>7.1f}x{note}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=65536)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    run(args.points, args.repeats)

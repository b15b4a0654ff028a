"""Pure-numpy hull-query kernel.

Same away-step Frank-Wolfe scheme as the compiled core, vectorized over the
set of still-undecided points; each loop pass advances every pending point
by one step, and decided points leave the batch.
"""

from __future__ import annotations

import numpy as np

_REFRESH_EVERY = 64


def _query_batch(gens, points, scale, tol, max_iter, threshold, member_mode):
    G = np.ascontiguousarray(gens, dtype=np.float64)
    Y = np.ascontiguousarray(points, dtype=np.float64)
    n, d = Y.shape
    ell = G.shape[0]
    Gt = G.T.copy()

    X = np.zeros((n, d))
    A = np.zeros((n, ell))
    ub = np.zeros(n)
    best_lb = np.zeros(n)
    iters = np.zeros(n, dtype=np.int64)
    member = np.zeros(n, dtype=bool)
    decided = np.zeros(n, dtype=bool)
    converged = np.zeros(n, dtype=bool)
    active = np.arange(n)
    thr = threshold + tol

    it = 0
    while active.size:
        Xa = X[active]
        Aa = A[active]
        R = Y[active] - Xa
        ubs = np.sqrt(np.einsum("ij,ij->i", R, R))
        C = R @ Gt  # (B, ell): <g_i, r>
        absC = np.abs(C)
        i_fw = absC.argmax(axis=1)
        rows = np.arange(active.size)
        c_fw = C[rows, i_fw]
        h = scale * absC[rows, i_fw]
        rx = np.einsum("ij,ij->i", R, Xa)
        gap = h - rx
        with np.errstate(divide="ignore", invalid="ignore"):
            lb = np.where(ubs > 0.0, ubs - gap / ubs, 0.0)
        bl = np.maximum(best_lb[active], lb)
        best_lb[active] = bl
        ub[active] = ubs
        iters[active] = it

        if member_mode:
            dec_in = ubs <= thr
            done = dec_in | (bl > thr)
            member[active[dec_in]] = True
            decided[active[done]] = True
        else:
            done = (ubs - bl <= tol) | (ubs == 0.0)
            converged[active[done]] = True
        if it >= max_iter:
            rest = ~done
            if member_mode:
                member[active[rest]] = ubs[rest] <= thr
            break
        it += 1

        # away atom: minimize <r, v> over active atoms; origin if w0 > 0.
        # Atom replaces the origin candidate only with a strictly negative
        # score, matching the compiled kernel's scan order.
        signA = np.sign(Aa)
        scores = np.where(Aa != 0.0, signA * C * scale, np.inf)
        i_aw = scores.argmin(axis=1)
        atom_val = scores[rows, i_aw]
        w0 = 1.0 - np.abs(Aa).sum(axis=1)
        has_atom = np.isfinite(atom_val)
        use0 = (w0 > 0.0) & (~has_atom | (atom_val >= 0.0))
        away_val = np.where(use0, 0.0, atom_val)
        w = np.where(use0, w0, np.abs(Aa[rows, i_aw]))
        any_away = has_atom | (w0 > 0.0)
        gap_away = np.where(any_away, rx - away_val, -np.inf)
        fw = ~any_away | (gap >= gap_away) | (w >= 1.0)

        sg = np.where(c_fw >= 0.0, 1.0, -1.0)
        D = np.empty_like(Xa)
        gmax = np.empty(active.size)
        idx_fw = np.flatnonzero(fw)
        idx_aw = np.flatnonzero(~fw)
        D[idx_fw] = (scale * sg[idx_fw])[:, None] * G[i_fw[idx_fw]] - Xa[idx_fw]
        gmax[idx_fw] = 1.0
        if idx_aw.size:
            V = np.zeros((idx_aw.size, d))
            na = ~use0[idx_aw]
            rows_na = idx_aw[na]
            s_na = signA[rows_na, i_aw[rows_na]]
            V[na] = (scale * s_na)[:, None] * G[i_aw[rows_na]]
            D[idx_aw] = Xa[idx_aw] - V
            gmax[idx_aw] = w[idx_aw] / (1.0 - w[idx_aw])

        dd = np.einsum("ij,ij->i", D, D)
        rd = np.einsum("ij,ij->i", R, D)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(dd > 0.0, rd / dd, 0.0)
        g = np.minimum(g, gmax)
        stall = ~done & ((dd <= 0.0) | (g <= 0.0))
        if stall.any():
            srows = np.flatnonzero(stall)
            sidx = active[srows]
            if member_mode:
                member[sidx] = ubs[srows] <= thr
            else:
                converged[sidx] = (ubs[srows] - bl[srows]) <= tol

        keep = ~(done | stall)
        ki = np.flatnonzero(keep)
        if ki.size == 0:
            break
        gk = g[ki]
        Xk = Xa[ki] + gk[:, None] * D[ki]
        Ak = Aa[ki]
        fwk = fw[ki]
        rows_fw = np.flatnonzero(fwk)
        rows_aw = np.flatnonzero(~fwk)
        if rows_fw.size:
            Ak[rows_fw] *= (1.0 - gk[rows_fw])[:, None]
            Ak[rows_fw, i_fw[ki][rows_fw]] += gk[rows_fw] * sg[ki][rows_fw]
        if rows_aw.size:
            Ak[rows_aw] *= (1.0 + gk[rows_aw])[:, None]
            orig_k = use0[ki]
            rows_na = rows_aw[~orig_k[rows_aw]]
            if rows_na.size:
                ia = i_aw[ki][rows_na]
                sa = signA[ki][rows_na, ia]
                Ak[rows_na, ia] -= gk[rows_na] * sa
                drop = gk[rows_na] >= gmax[ki][rows_na]
                Ak[rows_na[drop], ia[drop]] = 0.0
        X[active[ki]] = Xk
        A[active[ki]] = Ak
        active = active[ki]
        if it % _REFRESH_EVERY == 0 and active.size:
            X[active] = scale * (A[active] @ G)

    return ub, best_lb, iters, converged, member, decided


def hull_distance_batch(gens, points, scale, tol, max_iter):
    ub, lb, iters, converged, _, _ = _query_batch(
        gens, points, scale, tol, max_iter, 0.0, False)
    return ub, lb, iters, converged


def hull_member_batch(gens, points, scale, threshold, tol, max_iter):
    _, _, _, _, member, decided = _query_batch(
        gens, points, scale, tol, max_iter, threshold, True)
    return member, int((~decided).sum())

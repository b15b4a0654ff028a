# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hull-query kernel.

Per point y, runs away-step Frank-Wolfe on f(x) = ||y - x||^2 / 2 over
scale * conv{+-g_i}, tracking an upper bound (current residual norm) and a
dual lower bound (the separation certificate with direction y - x).
Membership queries exit as soon as either bound decides the point, which
for points far outside the hull happens at iteration zero after a single
matvec.
"""

from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc

import numpy as np

DEF REFRESH_EVERY = 64


cdef inline void _refresh_x(const double* G, const double* alpha, double scale,
                            Py_ssize_t ell, Py_ssize_t d, double* x) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double a
    for j in range(d):
        x[j] = 0.0
    for i in range(ell):
        a = alpha[i]
        if a != 0.0:
            for j in range(d):
                x[j] += a * G[i * d + j]
    for j in range(d):
        x[j] *= scale


cdef int _query(const double* G, Py_ssize_t ell, Py_ssize_t d, double scale,
                const double* y, double threshold, bint member_mode,
                double tol, long long max_iter,
                double* x, double* alpha, double* r,
                double* out_ub, double* out_lb, long long* out_iters) noexcept nogil:
    """Returns 1 decided member / converged, 0 decided non-member,
    -1 undecided at cap or stall (member mode: caller classifies by ub)."""
    cdef Py_ssize_t i, j, i_fw, i_away
    cdef double a, ci, v, ub, ub2, c_fw, h, rx, gap, lb, best_lb
    cdef double away_val, gap_away, w, w0, abs_sum, gmax, dd, rd, g, sg, s_away
    cdef double thr = threshold + tol
    cdef long long it = 0
    cdef bint fw_step

    for j in range(d):
        x[j] = 0.0
    for i in range(ell):
        alpha[i] = 0.0
    best_lb = 0.0
    s_away = 1.0

    while True:
        ub2 = 0.0
        for j in range(d):
            r[j] = y[j] - x[j]
            ub2 += r[j] * r[j]
        ub = sqrt(ub2)

        # FW atom: argmax_i |<g_i, r>|, first index on ties
        i_fw = 0
        c_fw = 0.0
        h = -1.0
        for i in range(ell):
            ci = 0.0
            for j in range(d):
                ci += G[i * d + j] * r[j]
            if fabs(ci) > h:
                h = fabs(ci)
                c_fw = ci
                i_fw = i
        h *= scale

        rx = 0.0
        for j in range(d):
            rx += r[j] * x[j]
        gap = h - rx

        if ub > 0.0:
            lb = ub - gap / ub
            if lb > best_lb:
                best_lb = lb
        out_ub[0] = ub
        out_lb[0] = best_lb
        out_iters[0] = it

        if member_mode:
            if ub <= thr:
                return 1
            if best_lb > thr:
                return 0
        else:
            if ub - best_lb <= tol or ub == 0.0:
                return 1
        if it >= max_iter:
            return -1
        it += 1

        # away atom: minimize <r, v> over active atoms (origin counts if w0 > 0)
        abs_sum = 0.0
        for i in range(ell):
            abs_sum += fabs(alpha[i])
        w0 = 1.0 - abs_sum
        i_away = -1
        away_val = 0.0
        w = -1.0
        if w0 > 0.0:
            i_away = -2  # origin atom
            w = w0
        for i in range(ell):
            a = alpha[i]
            if a != 0.0:
                ci = 0.0
                for j in range(d):
                    ci += G[i * d + j] * r[j]
                v = (1.0 if a > 0.0 else -1.0) * scale * ci
                if i_away == -1 or v < away_val:
                    away_val = v
                    i_away = i
                    w = fabs(a)
        if i_away == -1:
            fw_step = 1
        else:
            gap_away = rx - away_val
            # w >= 1 leaves no room to move away; take the FW branch
            fw_step = gap >= gap_away or w >= 1.0

        sg = 1.0 if c_fw >= 0.0 else -1.0
        dd = 0.0
        rd = 0.0
        if fw_step:
            for j in range(d):
                v = sg * scale * G[i_fw * d + j] - x[j]
                r[j + d] = v  # direction stashed past the residual
                dd += v * v
                rd += r[j] * v
            gmax = 1.0
        else:
            if i_away == -2:
                for j in range(d):
                    v = x[j]
                    r[j + d] = v
                    dd += v * v
                    rd += r[j] * v
            else:
                s_away = 1.0 if alpha[i_away] > 0.0 else -1.0
                for j in range(d):
                    v = x[j] - s_away * scale * G[i_away * d + j]
                    r[j + d] = v
                    dd += v * v
                    rd += r[j] * v
            gmax = w / (1.0 - w)

        if dd <= 0.0:
            return 1 if not member_mode and ub - best_lb <= tol else -1
        g = rd / dd
        if g > gmax:
            g = gmax
        if g <= 0.0:
            # numerical stall: bounds will not improve further
            if member_mode:
                return -1
            return 1 if ub - best_lb <= tol else -1

        for j in range(d):
            x[j] += g * r[j + d]
        if fw_step:
            for i in range(ell):
                alpha[i] *= 1.0 - g
            alpha[i_fw] += g * sg
        else:
            for i in range(ell):
                alpha[i] *= 1.0 + g
            if i_away >= 0:
                if g >= gmax:
                    alpha[i_away] = 0.0  # drop step
                else:
                    alpha[i_away] -= g * s_away
        if it % REFRESH_EVERY == 0:
            _refresh_x(G, alpha, scale, ell, d, x)


def hull_distance_batch(const double[:, ::1] gens, const double[:, ::1] points,
                        double scale, double tol, long long max_iter):
    """Distances from each row of `points` to scale*conv{+-gens rows}.

    Returns (upper, lower, iterations, converged) arrays.
    """
    cdef Py_ssize_t ell = gens.shape[0]
    cdef Py_ssize_t d = gens.shape[1]
    cdef Py_ssize_t n = points.shape[0]
    if points.shape[1] != d:
        raise ValueError("points dimension mismatch")

    ub_arr = np.empty(n, dtype=np.float64)
    lb_arr = np.empty(n, dtype=np.float64)
    it_arr = np.empty(n, dtype=np.int64)
    cv_arr = np.empty(n, dtype=np.uint8)
    cdef double[::1] ub = ub_arr
    cdef double[::1] lb = lb_arr
    cdef long long[::1] its = it_arr
    cdef unsigned char[::1] cv = cv_arr

    cdef double* work = <double*> malloc((ell + 3 * d) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double* alpha = work
    cdef double* x = work + ell
    cdef double* r = work + ell + d  # 2*d doubles: residual + direction
    cdef Py_ssize_t k
    cdef int res
    cdef const double* gp = &gens[0, 0]
    try:
        with nogil:
            for k in range(n):
                res = _query(gp, ell, d, scale, &points[k, 0], 0.0, 0,
                             tol, max_iter, x, alpha, r,
                             &ub[k], &lb[k], &its[k])
                cv[k] = 1 if res == 1 else 0
    finally:
        free(work)
    return ub_arr, lb_arr, it_arr, cv_arr.astype(bool)


def hull_member_batch(const double[:, ::1] gens, const double[:, ::1] points,
                      double scale, double threshold, double tol,
                      long long max_iter):
    """Decide dist(y, scale*conv{+-g_i}) <= threshold + tol per point.

    Returns (member boolean array, undecided count); undecided points are
    classified by their final upper bound.
    """
    cdef Py_ssize_t ell = gens.shape[0]
    cdef Py_ssize_t d = gens.shape[1]
    cdef Py_ssize_t n = points.shape[0]
    if points.shape[1] != d:
        raise ValueError("points dimension mismatch")

    mem_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] mem = mem_arr
    cdef double* work = <double*> malloc((ell + 3 * d) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double* alpha = work
    cdef double* x = work + ell
    cdef double* r = work + ell + d
    cdef double ub = 0.0, lb = 0.0
    cdef long long its = 0
    cdef Py_ssize_t k
    cdef int res
    cdef long long undecided = 0
    cdef const double* gp = &gens[0, 0]
    try:
        with nogil:
            for k in range(n):
                res = _query(gp, ell, d, scale, &points[k, 0], threshold, 1,
                             tol, max_iter, x, alpha, r, &ub, &lb, &its)
                if res == -1:
                    undecided += 1
                    mem[k] = 1 if ub <= threshold + tol else 0
                else:
                    mem[k] = <unsigned char> res
    finally:
        free(work)
    return mem_arr.astype(bool), int(undecided)

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as ``_pure.py``."""
from libc.math cimport INFINITY

import numpy as np

cdef double TAU = 1e-12

cdef enum:
    _OPTIMAL = 0
    _UNBOUNDED = 1
    _ITERATION_LIMIT = 2

OPTIMAL = _OPTIMAL
UNBOUNDED = _UNBOUNDED
ITERATION_LIMIT = _ITERATION_LIMIT


cdef inline double _dot(const double[:, ::1] X, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0
    for k in range(X.shape[1]):
        s += X[a, k] * X[b, k]
    return s


def smo(const double[:, ::1] X, const double[::1] y, double C, double eps,
        Py_ssize_t max_iter, double[::1] alpha, double[::1] w):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t t, k, i, j, it
    cdef double[::1] kdiag = np.empty(n)
    cdef double[::1] G = np.empty(n)
    cdef double[::1] ki = np.empty(n)
    cdef double[::1] step = np.empty(d)
    cdef double s, myg, gmax, gmin, best, gd, quad, sc
    cdef double yi, yj, ai, aj, ai_old, aj_old, qc, delta, diff, total, dai, daj
    cdef bint up, low, converged = False
    it = 0

    with nogil:
        for t in range(n):
            kdiag[t] = _dot(X, t, t)
            s = 0.0
            for k in range(d):
                s += X[t, k] * w[k]
            G[t] = y[t] * s - 1.0

        for it in range(max_iter):
            i = -1
            gmax = -INFINITY
            gmin = INFINITY
            for t in range(n):
                myg = -y[t] * G[t]
                if y[t] > 0:
                    up = alpha[t] < C
                    low = alpha[t] > 0
                else:
                    up = alpha[t] > 0
                    low = alpha[t] < C
                if up and myg > gmax:
                    gmax = myg
                    i = t
                if low and myg < gmin:
                    gmin = myg
            if i < 0 or gmin == INFINITY or gmax - gmin < eps:
                converged = True
                break

            j = -1
            best = INFINITY
            for t in range(n):
                ki[t] = _dot(X, t, i)
            for t in range(n):
                if y[t] > 0:
                    low = alpha[t] > 0
                else:
                    low = alpha[t] < C
                if not low:
                    continue
                gd = gmax + y[t] * G[t]
                if gd > 0:
                    quad = kdiag[i] + kdiag[t] - 2.0 * ki[t]
                    if quad <= 0:
                        quad = TAU
                    sc = -(gd * gd) / quad
                    if sc < best:
                        best = sc
                        j = t
            if j < 0:
                converged = True
                break

            yi = y[i]
            yj = y[j]
            ai_old = alpha[i]
            aj_old = alpha[j]
            ai = ai_old
            aj = aj_old
            qc = kdiag[i] + kdiag[j] - 2.0 * ki[j]
            if qc <= 0:
                qc = TAU
            if yi != yj:
                delta = (-G[i] - G[j]) / qc
                diff = ai - aj
                ai += delta
                aj += delta
                if diff > 0:
                    if aj < 0:
                        aj = 0.0
                        ai = diff
                elif ai < 0:
                    ai = 0.0
                    aj = -diff
                if diff > 0:
                    if ai > C:
                        ai = C
                        aj = C - diff
                elif aj > C:
                    aj = C
                    ai = C + diff
            else:
                delta = (G[i] - G[j]) / qc
                total = ai + aj
                ai -= delta
                aj += delta
                if total > C:
                    if ai > C:
                        ai = C
                        aj = total - C
                elif aj < 0:
                    aj = 0.0
                    ai = total
                if total > C:
                    if aj > C:
                        aj = C
                        ai = total - C
                elif ai < 0:
                    ai = 0.0
                    aj = total

            dai = ai - ai_old
            daj = aj - aj_old
            alpha[i] = ai
            alpha[j] = aj
            for k in range(d):
                step[k] = dai * yi * X[i, k] + daj * yj * X[j, k]
                w[k] += step[k]
            for t in range(n):
                s = 0.0
                for k in range(d):
                    s += X[t, k] * step[k]
                G[t] += y[t] * s
        else:
            it = max_iter
    return it, bool(converged)


cdef void _pivot(double[:, ::1] tab, Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t rows = tab.shape[0], cols = tab.shape[1], a, c
    cdef double piv = tab[p, q], f
    for c in range(cols):
        tab[p, c] /= piv
    for a in range(rows):
        if a == p:
            continue
        f = tab[a, q]
        if f != 0.0:
            for c in range(cols):
                tab[a, c] -= f * tab[p, c]
        tab[a, q] = 0.0
    tab[p, q] = 1.0


def pivot(double[:, ::1] tab, Py_ssize_t p, Py_ssize_t q):
    _pivot(tab, p, q)


def simplex_iterate(double[:, ::1] tab, long[::1] basis, Py_ssize_t n_cols, double tol,
                    Py_ssize_t max_iter, Py_ssize_t bland_after):
    cdef Py_ssize_t r = tab.shape[0] - 1, last = tab.shape[1] - 1
    cdef Py_ssize_t it, c, a, p, q, degenerate = 0
    cdef double best, ratio, rmin
    cdef bint bland = False
    cdef int status = _ITERATION_LIMIT
    it = 0

    with nogil:
        for it in range(max_iter):
            q = -1
            if bland:
                for c in range(n_cols):
                    if tab[r, c] < -tol:
                        q = c
                        break
            else:
                best = INFINITY
                for c in range(n_cols):
                    if tab[r, c] < best:
                        best = tab[r, c]
                        q = c
                if best >= -tol:
                    q = -1
            if q < 0:
                status = _OPTIMAL
                break

            rmin = INFINITY
            for a in range(r):
                if tab[a, q] > tol:
                    ratio = tab[a, last] / tab[a, q]
                    if ratio < rmin:
                        rmin = ratio
            if rmin == INFINITY:
                status = _UNBOUNDED
                break
            p = -1
            for a in range(r):
                if tab[a, q] > tol and tab[a, last] / tab[a, q] <= rmin + tol:
                    if p < 0 or basis[a] < basis[p]:
                        p = a
            if rmin <= tol:
                degenerate += 1
                if degenerate > bland_after:
                    bland = True
            else:
                degenerate = 0
            _pivot(tab, p, q)
            basis[p] = q
        else:
            it = max_iter
    return status, it

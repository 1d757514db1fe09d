# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Every function mirrors one in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, log, lgamma, NAN, INFINITY

cnp.import_array()

DEF NPART = 128


# Shewchuk partials: the multiset of partials sums exactly to everything added.
cdef struct ExactSum:
    int n
    double p[NPART]


cdef inline void xs_reset(ExactSum* s) noexcept nogil:
    s.n = 0


cdef inline void xs_add(ExactSum* s, double x) noexcept nogil:
    cdef int i = 0, j
    cdef double y, t, hi, lo
    for j in range(s.n):
        y = s.p[j]
        if fabs(x) < fabs(y):
            t = x
            x = y
            y = t
        hi = x + y
        lo = y - (hi - x)
        if lo != 0.0:
            s.p[i] = lo
            i += 1
        x = hi
    s.n = i
    if x != 0.0:
        s.p[s.n] = x
        s.n += 1


cdef inline void xs_add_times(ExactSum* s, double x, long k) noexcept nogil:
    # k * x as a sum of exact power-of-two multiples of x
    cdef double term = x
    while k > 0:
        if k & 1:
            xs_add(s, term)
        term = term * 2.0
        k >>= 1


cdef inline double xs_value(ExactSum* s) noexcept nogil:
    # correctly rounded value of the partials (same final step as math.fsum)
    cdef int n = s.n
    cdef double hi = 0.0, lo = 0.0, x, y, yr
    if n > 0:
        n -= 1
        hi = s.p[n]
        while n > 0:
            x = hi
            n -= 1
            y = s.p[n]
            hi = x + y
            yr = hi - x
            lo = y - yr
            if lo != 0.0:
                break
        if n > 0 and ((lo < 0.0 and s.p[n - 1] < 0.0) or (lo > 0.0 and s.p[n - 1] > 0.0)):
            y = lo * 2.0
            x = hi + y
            yr = x - hi
            if y == yr:
                hi = x
    return hi


cdef struct Agg:
    long count
    double smax
    double smin
    double amax
    double amin
    ExactSum ssum
    ExactSum asum


cdef inline void agg_init(Agg* g) noexcept nogil:
    g.count = 0
    g.smax = -INFINITY
    g.smin = INFINITY
    g.amax = -INFINITY
    g.amin = INFINITY
    xs_reset(&g.ssum)
    xs_reset(&g.asum)


cdef inline void agg_push(Agg* g, double sv, long s, long k) noexcept nogil:
    # k consecutive windows share the sum sv over s records
    cdef double av = sv / s
    g.count += k
    xs_add_times(&g.ssum, sv, k)
    xs_add_times(&g.asum, av, k)
    if sv > g.smax:
        g.smax = sv
    if sv < g.smin:
        g.smin = sv
    if av > g.amax:
        g.amax = av
    if av < g.amin:
        g.amin = av


cdef tuple agg_result(Agg* g):
    if g.count == 0:
        return (0, NAN, NAN, NAN, NAN, NAN, NAN)
    return (g.count,
            xs_value(&g.ssum) / g.count, g.smax, g.smin,
            xs_value(&g.asum) / g.count, g.amax, g.amin)


def window_aggregates_timecut(const cnp.int64_t[::1] offsets, const double[::1] values,
                              long w, long j_start):
    """Slice every window frame from the bucket grid and aggregate it."""
    cdef long ell = offsets.shape[0] - 1
    cdef long j, first, r
    cdef long s
    cdef ExactSum frame
    cdef Agg g
    agg_init(&g)
    with nogil:
        for j in range(j_start, ell):
            first = j - w + 1
            if first < 0:
                first = 0
            s = offsets[j + 1] - offsets[first]
            if s == 0:
                continue
            xs_reset(&frame)
            for r in range(offsets[first], offsets[j + 1]):
                xs_add(&frame, values[r])
            agg_push(&g, xs_value(&frame), s, 1)
    return agg_result(&g)


def window_aggregates_sparse(const cnp.int64_t[::1] buckets, const double[::1] values,
                             long ell, long w, long j_start):
    """Roll a window over records sorted by bucket; cost linear in records."""
    cdef long nrec = buckets.shape[0]
    cdef long enter = 0, leave = 0, live = 0
    cdef long j, nxt, cand
    cdef ExactSum frame
    cdef Agg g
    agg_init(&g)
    xs_reset(&frame)
    with nogil:
        j = j_start
        while j < ell:
            while enter < nrec and buckets[enter] <= j:
                xs_add(&frame, values[enter])
                enter += 1
                live += 1
            while leave < enter and buckets[leave] <= j - w:
                xs_add(&frame, -values[leave])
                leave += 1
                live -= 1
            nxt = ell
            if enter < nrec:
                cand = buckets[enter]
                if cand < nxt:
                    nxt = cand
            if leave < enter:
                cand = buckets[leave] + w
                if cand < nxt:
                    nxt = cand
            if live > 0:
                agg_push(&g, xs_value(&frame), live, nxt - j)
            j = nxt
    return agg_result(&g)


def exit_expectations(const double[::1] weights, long w, const double[::1] gx,
                      const double[::1] gmu, bint sum_window, bint binomial_exit=False):
    """Sum over n (weighted) and departing count a of the Poisson exit law.

    Avg window: coefficients gx[n - a], gmu[n - a] (already summed over the
    incoming count). Sum window: x-coefficient (n - a) / n, mu-coefficient gmu[0].
    ``binomial_exit`` restricts a to {0, 1} with P(a = 1) = n / w.
    """
    cdef long N = weights.shape[0] - 1
    cdef long n, a, d
    cdef double kappa = 0.0, phi = 0.0, rowx, rowm, e, an, kx
    cdef double lw1, lw
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lf_arr = np.empty(N + 1)
    cdef double[::1] lf = lf_arr
    for n in range(N + 1):
        lf[n] = lgamma(n + 1.0)
    lw = log(<double>w)
    lw1 = log(<double>(w - 1)) if w > 1 else 0.0
    with nogil:
        for n in range(N + 1):
            an = weights[n]
            if an == 0.0:
                continue
            rowx = 0.0
            rowm = 0.0
            for a in range(n + 1):
                d = n - a
                if binomial_exit:
                    if a > 1:
                        break
                    e = (<double>n) / w if a == 1 else 1.0 - (<double>n) / w
                elif w == 1:
                    e = 1.0 if d == 0 else 0.0
                else:
                    e = exp(lf[n] - lf[a] - lf[d] + d * lw1 - n * lw)
                if sum_window:
                    kx = 1.0 if n == 0 else (<double>d) / n
                    rowx += e * kx
                    rowm += e * gmu[0]
                else:
                    rowx += e * gx[d]
                    rowm += e * gmu[d]
            kappa += an * rowx
            phi += an * rowm
    return kappa, phi


def best_split_class(const double[:, ::1] X, const cnp.int64_t[:, ::1] order,
                     const cnp.int64_t[::1] y, long n_classes):
    """Best Gini split over the columns of X; score = L2/nl + R2/nr."""
    cdef long n = X.shape[0], k = X.shape[1]
    cdef long c, i, cls
    cdef long long L2, R2
    cdef double score, best = -INFINITY, lo, hi, thr = 0.0
    cdef long best_col = -1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tot_arr = np.zeros(n_classes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] left_arr = np.zeros(n_classes, dtype=np.int64)
    cdef cnp.int64_t[::1] tot = tot_arr
    cdef cnp.int64_t[::1] left = left_arr
    cdef long long P2 = 0
    with nogil:
        for i in range(n):
            tot[y[i]] += 1
        for cls in range(n_classes):
            P2 += tot[cls] * tot[cls]
        for c in range(k):
            for cls in range(n_classes):
                left[cls] = 0
            L2 = 0
            R2 = P2
            for i in range(n - 1):
                cls = y[order[i, c]]
                L2 += 2 * left[cls] + 1
                R2 -= 2 * (tot[cls] - left[cls]) - 1
                left[cls] += 1
                lo = X[order[i, c], c]
                hi = X[order[i + 1, c], c]
                if hi <= lo:
                    continue
                score = (<double>L2) / (i + 1) + (<double>R2) / (n - i - 1)
                if score > best:
                    best = score
                    best_col = c
                    thr = (lo + hi) / 2.0
                    if thr >= hi:
                        thr = lo
    return best_col, thr, best


def best_split_reg(const double[:, ::1] X, const cnp.int64_t[:, ::1] order,
                   const double[::1] y):
    """Best variance-reduction split; score = Sl^2/nl + Sr^2/nr."""
    cdef long n = X.shape[0], k = X.shape[1]
    cdef long c, i
    cdef double total, run, sr, score, best = -INFINITY, lo, hi, thr = 0.0
    cdef long best_col = -1
    with nogil:
        for c in range(k):
            total = 0.0
            for i in range(n):
                total += y[order[i, c]]
            run = 0.0
            for i in range(n - 1):
                run += y[order[i, c]]
                lo = X[order[i, c], c]
                hi = X[order[i + 1, c], c]
                if hi <= lo:
                    continue
                sr = total - run
                score = run * run / (i + 1) + sr * sr / (n - i - 1)
                if score > best:
                    best = score
                    best_col = c
                    thr = (lo + hi) / 2.0
                    if thr >= hi:
                        thr = lo
    return best_col, thr, best

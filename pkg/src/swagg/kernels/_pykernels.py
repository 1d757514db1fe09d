"""Pure-Python/numpy versions of the compiled kernels.

Window sums go through exactly-rounded summation, so results match the
compiled module bit for bit; split search uses the same arithmetic order.
"""

import math

import numpy as np

_NAN_RESULT = (0, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan)


def _partials_add(partials, x):
    # Shewchuk: keep non-overlapping partials whose exact sum is the running total
    i = 0
    for y in partials:
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo:
            partials[i] = lo
            i += 1
        x = hi
    del partials[i:]
    if x:
        partials.append(x)


def _partials_add_times(partials, x, k):
    while k:
        if k & 1:
            _partials_add(partials, x)
        x *= 2.0
        k >>= 1


class _Agg:
    __slots__ = ("count", "ssum", "asum", "smax", "smin", "amax", "amin")

    def __init__(self):
        self.count = 0
        self.ssum, self.asum = [], []
        self.smax = self.amax = -math.inf
        self.smin = self.amin = math.inf

    def push(self, sv, s, k):
        av = sv / s
        self.count += k
        _partials_add_times(self.ssum, sv, k)
        _partials_add_times(self.asum, av, k)
        self.smax = max(self.smax, sv)
        self.smin = min(self.smin, sv)
        self.amax = max(self.amax, av)
        self.amin = min(self.amin, av)

    def result(self):
        if self.count == 0:
            return _NAN_RESULT
        return (self.count, math.fsum(self.ssum) / self.count, self.smax, self.smin,
                math.fsum(self.asum) / self.count, self.amax, self.amin)


def window_aggregates_timecut(offsets, values, w, j_start):
    offsets = offsets.tolist()
    values = values.tolist()
    ell = len(offsets) - 1
    g = _Agg()
    for j in range(j_start, ell):
        lo, hi = offsets[max(0, j - w + 1)], offsets[j + 1]
        if hi > lo:
            g.push(math.fsum(values[lo:hi]), hi - lo, 1)
    return g.result()


def window_aggregates_sparse(buckets, values, ell, w, j_start):
    buckets = buckets.tolist()
    values = values.tolist()
    nrec = len(buckets)
    enter = leave = live = 0
    frame = []
    g = _Agg()
    j = j_start
    while j < ell:
        while enter < nrec and buckets[enter] <= j:
            _partials_add(frame, values[enter])
            enter += 1
            live += 1
        while leave < enter and buckets[leave] <= j - w:
            _partials_add(frame, -values[leave])
            leave += 1
            live -= 1
        nxt = ell
        if enter < nrec:
            nxt = min(nxt, buckets[enter])
        if leave < enter:
            nxt = min(nxt, buckets[leave] + w)
        if live:
            g.push(math.fsum(frame), live, nxt - j)
        j = nxt
    return g.result()


def exit_expectations(weights, w, gx, gmu, sum_window, binomial_exit=False):
    N = len(weights) - 1
    n = np.arange(N + 1)[:, None]
    a = np.arange(N + 1)[None, :]
    d = n - a
    valid = d >= 0
    dd = np.where(valid, d, 0)
    if binomial_exit:
        e = np.where(a == 0, 1.0 - n / w, 0.0) + np.where(a == 1, n / w, 0.0)
    elif w == 1:
        e = (d == 0).astype(np.float64)
    else:
        lf = np.array([math.lgamma(k + 1.0) for k in range(N + 1)])
        with np.errstate(over="ignore"):
            e = np.exp(lf[n] - lf[np.minimum(a, N)] - lf[dd]
                       + dd * math.log(w - 1) - n * math.log(w))
    e = np.where(valid, e, 0.0)
    if sum_window:
        kx = np.where(n == 0, 1.0, dd / np.maximum(n, 1))
        rowx = (e * kx).sum(axis=1)
        rowm = e.sum(axis=1) * gmu[0]
    else:
        rowx = (e * np.asarray(gx)[dd]).sum(axis=1)
        rowm = (e * np.asarray(gmu)[dd]).sum(axis=1)
    weights = np.asarray(weights)
    return float(np.dot(weights, rowx)), float(np.dot(weights, rowm))


def _pick(score, Xs):
    # first maximum in column-major scan order, like the compiled loop
    n = Xs.shape[0]
    if n < 2:
        return -1, 0.0, -math.inf
    valid = Xs[1:] > Xs[:-1]
    score = np.where(valid, score, -np.inf)
    flat = score.T.ravel()
    pos = int(np.argmax(flat))
    if not np.isfinite(flat[pos]):
        return -1, 0.0, -math.inf
    c, i = divmod(pos, n - 1)
    lo, hi = Xs[i, c], Xs[i + 1, c]
    thr = (lo + hi) / 2.0
    if thr >= hi:
        thr = lo
    return c, float(thr), float(flat[pos])


def best_split_class(X, order, y, n_classes):
    n, k = X.shape
    Xs = np.take_along_axis(X, order, axis=0)
    Ys = y[order]
    tot = np.bincount(y, minlength=n_classes)
    P2 = int((tot * tot).sum())
    # occurrence rank of each label within its prefix
    by_cls = np.argsort(Ys, axis=0, kind="stable")
    cls_sorted = np.take_along_axis(Ys, by_cls, axis=0)
    pos = np.broadcast_to(np.arange(n)[:, None], (n, k))
    start = np.where(np.vstack([np.ones((1, k), bool), cls_sorted[1:] != cls_sorted[:-1]]), pos, 0)
    rank_sorted = pos - np.maximum.accumulate(start, axis=0)
    rank = np.empty_like(rank_sorted)
    np.put_along_axis(rank, by_cls, rank_sorted, axis=0)
    L2 = np.cumsum(2 * rank + 1, axis=0)
    R2 = P2 - np.cumsum(2 * (tot[Ys] - rank) - 1, axis=0)
    i = np.arange(n - 1)[:, None]
    score = L2[:-1] / (i + 1) + R2[:-1] / (n - i - 1)
    return _pick(score, Xs)


def best_split_reg(X, order, y):
    n, k = X.shape
    Xs = np.take_along_axis(X, order, axis=0)
    cs = np.cumsum(y[order], axis=0)
    total = cs[-1]
    run = cs[:-1]
    sr = total - run
    i = np.arange(n - 1)[:, None]
    score = run * run / (i + 1) + sr * sr / (n - i - 1)
    return _pick(score, Xs)

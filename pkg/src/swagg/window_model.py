"""Window definitions, the Gaussian-mixture stationary law of the window
chain, and the per-situation transition probabilities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .data_core import Assumption, AssumptionParams
from .errors import DomainError


class WindowKind(str, enum.Enum):
    SUM = "sum"
    AVG = "avg"


_LOGFACT = np.array([math.lgamma(k + 1.0) for k in range(1024)])


def _lgamma1(x):
    """log(x!) elementwise for non-negative integers."""
    global _LOGFACT
    x = np.asarray(x, dtype=np.int64)
    top = int(x.max(initial=0))
    if top >= len(_LOGFACT):
        _LOGFACT = np.array([math.lgamma(k + 1.0) for k in range(2 * top + 1)])
    return _LOGFACT[x]


def max_count(params: AssumptionParams, w: int) -> int:
    """Largest possible number of records inside one window, ``m * w``."""
    return (1 if params.kind is not Assumption.POISSON else params.m) * w


def count_distribution(params: AssumptionParams, w: int) -> np.ndarray:
    """Law of the record count S inside a window of ``w`` buckets, on 0..m*w."""
    if w < 1:
        raise DomainError("period must be >= 1")
    n = np.arange(max_count(params, w) + 1)
    if params.kind is Assumption.POISSON:
        rate = w * params.p
        if rate == 0.0:
            out = np.zeros(len(n))
            out[0] = 1.0
            return out
        logpmf = n * math.log(rate) - rate - _lgamma1(n)
        pmf = np.exp(logpmf - logpmf.max())
        return pmf / pmf.sum()

    p = 1.0 if params.kind is Assumption.ALWAYS else params.p
    out = np.zeros(w + 1)
    if p <= 0.0:
        out[0] = 1.0
        return out
    if p >= 1.0:
        out[w] = 1.0
        return out
    logc = math.lgamma(w + 1) - _lgamma1(n) - _lgamma1(w - n)
    out[:] = np.exp(logc + n * math.log(p) + (w - n) * math.log1p(-p))
    return out


@dataclass(frozen=True)
class StationaryMixture:
    """Mixture ``sum_n weights[n] * N(scale_means[n] * mu, scale_vars[n] * sigma**2)``.

    Component 0 is the empty window, a point mass at 0.
    """

    kind: WindowKind
    weights: np.ndarray
    scale_means: np.ndarray
    scale_vars: np.ndarray
    mu: float
    sigma: float
    w: int
    m: int

    @property
    def b_bar(self) -> float:
        return float(np.dot(self.weights, self.scale_means))

    @property
    def mean(self) -> float:
        return self.b_bar * self.mu

    def component_means(self) -> np.ndarray:
        return self.scale_means * self.mu

    def component_stds(self) -> np.ndarray:
        return np.sqrt(self.scale_vars) * self.sigma

    def nonempty_mass(self) -> float:
        return float(self.weights[1:].sum())

    def bin_density(self, lo: np.ndarray, hi: np.ndarray, drop_empty: bool = True) -> np.ndarray:
        """Average density over each bin ``[lo, hi)``, optionally conditioned on S > 0."""
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        start = 1 if drop_empty else 0
        mass = np.zeros_like(lo)
        for n in range(start, len(self.weights)):
            a = self.weights[n]
            if a == 0.0:
                continue
            mean = self.scale_means[n] * self.mu
            sd = math.sqrt(self.scale_vars[n]) * self.sigma
            if sd == 0.0:
                mass += a * ((lo <= mean) & (mean < hi))
            else:
                cdf = np.vectorize(lambda x: 0.5 * math.erfc(-(x - mean) / (sd * math.sqrt(2))))
                mass += a * (cdf(hi) - cdf(lo))
        total = self.nonempty_mass() if drop_empty else 1.0
        return mass / (total * (hi - lo))


def stationary_mixture(kind: WindowKind | str, params: AssumptionParams, w: int) -> StationaryMixture:
    kind = WindowKind(kind)
    weights = count_distribution(params, w)
    n = np.arange(len(weights), dtype=np.float64)
    if kind is WindowKind.SUM:
        b, c = n.copy(), n.copy()
    else:
        b = (n > 0).astype(np.float64)
        c = np.zeros_like(n)
        c[1:] = 1.0 / n[1:]
    return StationaryMixture(kind=kind, weights=weights, scale_means=b, scale_vars=c,
                             mu=params.mu, sigma=params.sigma, w=w, m=max_count(params, w) // w)


def exit_prob(params: AssumptionParams, n: int, a: int, w: int) -> float:
    """P(the departing bucket holds ``a`` records | the window holds ``n``)."""
    if a < 0 or n < 0 or a > n:
        raise DomainError(f"need 0 <= a <= n, got a={a}, n={n}")
    if params.kind is not Assumption.POISSON:
        if a > 1:
            return 0.0
        frac = n / w
        return frac if a == 1 else 1.0 - frac
    if w == 1:
        return 1.0 if a == n else 0.0
    logp = (math.lgamma(n + 1) - math.lgamma(a + 1) - math.lgamma(n - a + 1)
            + (n - a) * math.log(w - 1) - n * math.log(w))
    return math.exp(logp)


def exit_probs(params: AssumptionParams, n: int, w: int) -> np.ndarray:
    """Vector of :func:`exit_prob` over the departing count a = 0..n (or 0..1)."""
    if params.kind is not Assumption.POISSON:
        frac = n / w
        return np.array([1.0 - frac, frac]) if n >= 1 else np.array([1.0])
    a = np.arange(n + 1)
    if w == 1:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    logp = (math.lgamma(n + 1) - _lgamma1(a) - _lgamma1(n - a)
            + (n - a) * math.log(w - 1) - n * math.log(w))
    return np.exp(logp)


def incoming_probs(params: AssumptionParams) -> np.ndarray:
    """P(the incoming bucket holds b records) for b = 0..m, tail folded into m."""
    p = params.p
    if params.kind is Assumption.ALWAYS:
        return np.array([0.0, 1.0])
    if params.kind is Assumption.BINOMIAL:
        return np.array([1.0 - p, p])
    m = params.m
    if p == 0.0:
        out = np.zeros(m + 1)
        out[0] = 1.0
        return out
    b = np.arange(m + 1)
    pmf = np.exp(b * math.log(p) - p - _lgamma1(b))
    pmf[m] = max(0.0, 1.0 - pmf[:m].sum())
    return pmf


def incoming_prob(params: AssumptionParams, b: int) -> float:
    probs = incoming_probs(params)
    if b < 0 or b >= len(probs):
        raise DomainError(f"incoming count {b} outside 0..{len(probs) - 1}")
    return float(probs[b])


def next_state_coeffs(kind: WindowKind | str, n: int, a: int, b: int) -> tuple[float, float]:
    """(k_x, k_mu) with E[next window | x, a leaving, b arriving, n held] = k_x*x + k_mu*mu."""
    kind = WindowKind(kind)
    if kind is WindowKind.SUM:
        return (1.0 if n == 0 else (n - a) / n), float(b)
    d = n - a + b
    if d == 0:
        return 1.0, 0.0
    return (n - a) / d, b / d

"""One-step mean-transfer coefficients of the window chain and the spectral
ratio that sets the width of its Hoeffding bound."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data_core import Assumption, AssumptionParams
from .errors import DegenerateChain
from .window_model import StationaryMixture, WindowKind, incoming_probs

LAMBDA_CEILING = 1.0 - 1e-9


class LambdaMethod(str, enum.Enum):
    FULL = "full"
    DEGENERATE = "degenerate"
    LITERAL_DEGENERATE = "literal-degenerate"


@dataclass(frozen=True)
class SpectralQuantities:
    kappa: float
    phi: float
    lam: float
    lambda_lower: float
    method: LambdaMethod
    clamped: bool = False

    @property
    def alpha(self) -> float:
        return hoeffding_alpha(self.lam)


def hoeffding_alpha(lam: float) -> float:
    return (1.0 + lam) / (1.0 - lam)


def _incoming_sums(inc: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Avg-window coefficients summed over the incoming count, indexed by kept count d."""
    d = np.arange(size, dtype=np.float64)[:, None]
    b = np.arange(len(inc), dtype=np.float64)[None, :]
    tot = d + b
    safe = np.where(tot > 0, tot, 1.0)
    kx = np.where(tot > 0, d / safe, 1.0)
    kmu = np.where(tot > 0, b / safe, 0.0)
    return kx @ inc, kmu @ inc


def enumerate_kappa_phi(kind: WindowKind | str, weights: np.ndarray, w: int, inc: np.ndarray,
                        binomial_exit: bool = False) -> tuple[float, float]:
    """Situation enumeration over (n, a, b) with the multi-record exit law.

    ``inc`` is the incoming-count law. ``binomial_exit`` limits departures to
    a in {0, 1} with P(a = 1) = n / w.
    """
    kind = WindowKind(kind)
    N = len(weights) - 1
    mean_in = float(np.dot(np.arange(len(inc)), inc))
    if kind is WindowKind.SUM:
        gx, gmu = np.ones(1), np.array([mean_in])
    else:
        gx, gmu = _incoming_sums(inc, N + 1)
    k, f = kernels.exit_expectations(np.ascontiguousarray(weights, dtype=np.float64), int(w),
                                     np.ascontiguousarray(gx), np.ascontiguousarray(gmu),
                                     kind is WindowKind.SUM, binomial_exit)
    return float(k), float(f)


def kappa_phi(kind: WindowKind | str, params: AssumptionParams, mixture: StationaryMixture,
              w: int) -> tuple[float, float]:
    """Coefficients of x and mu in E[next window | current window = x], averaged
    over the count law. Incoming counts are summed out first."""
    kind = WindowKind(kind)
    weights = mixture.weights
    N = len(weights) - 1
    inc = incoming_probs(params)
    mean_in = float(np.dot(np.arange(len(inc)), inc))

    if params.kind is Assumption.POISSON:
        return enumerate_kappa_phi(kind, weights, w, inc)

    # at most one record leaves per step: a in {0, 1}
    n = np.arange(N + 1, dtype=np.float64)
    leave = n / w
    stay = 1.0 - leave
    if kind is WindowKind.SUM:
        kx_leave = np.where(n > 0, (n - 1) / np.maximum(n, 1), 0.0)
        kappa = np.dot(weights, stay + leave * kx_leave)
        phi = mean_in * weights.sum()
    else:
        gx, gmu = _incoming_sums(inc, N + 1)
        nm1 = np.maximum(np.arange(N + 1) - 1, 0)
        kappa = np.dot(weights, stay * gx + leave * gx[nm1])
        phi = np.dot(weights, stay * gmu + leave * gmu[nm1])
    return float(kappa), float(phi)


def raw_spectral_lambda(mixture: StationaryMixture, kappa: float, phi: float) -> float:
    """Ratio of pi-norms of one-step-transferred and raw centred identity, unclamped."""
    a, b, c = mixture.weights, mixture.scale_means, mixture.scale_vars
    mu2, s2 = mixture.mu ** 2, mixture.sigma ** 2
    b_bar = float(np.dot(a, b))
    den = float(np.dot(a, c * s2 + (b - b_bar) ** 2 * mu2))
    if not den > 0.0:
        raise DegenerateChain("window chain has zero stationary variance")
    # kappa^2 (b - (b_bar - phi)/kappa)^2 written without dividing by kappa
    num = float(np.dot(a, kappa ** 2 * c * s2 + (kappa * b - b_bar + phi) ** 2 * mu2))
    return math.sqrt(num / den)


def clamp_lambda(lam: float) -> tuple[float, bool]:
    if lam < 0.0:
        return 0.0, True
    if lam > LAMBDA_CEILING:
        return LAMBDA_CEILING, True
    return lam, False


def spectral_lambda(mixture: StationaryMixture, kappa: float, phi: float) -> float:
    return clamp_lambda(raw_spectral_lambda(mixture, kappa, phi))[0]


def degenerate_lambda(params: AssumptionParams, mixture: StationaryMixture, w: int) -> float:
    """Stationary probability that a step leaves the window untouched."""
    if params.kind is Assumption.ALWAYS:
        return 0.0
    n = np.arange(len(mixture.weights), dtype=np.float64)
    nothing_in = incoming_probs(params)[0]
    if params.kind is Assumption.BINOMIAL:
        nothing_out = 1.0 - n / w
    else:
        nothing_out = ((w - 1) / w) ** n
    return float(min(1.0, max(0.0, np.dot(mixture.weights, nothing_out) * nothing_in)))


def literal_degenerate_lambda(params: AssumptionParams, w: int) -> float:
    """Unweighted retention sum over n = 0..w; debug comparison only, may exceed 1."""
    p = 1.0 if params.kind is Assumption.ALWAYS else params.p
    if params.kind is Assumption.POISSON:
        p = 1.0 - math.exp(-params.p)
    n = np.arange(w + 1)
    return float(np.sum((1.0 - n / w) * (1.0 - p)))


def spectral_quantities(kind: WindowKind | str, params: AssumptionParams,
                        mixture: StationaryMixture, w: int,
                        method: LambdaMethod | str = LambdaMethod.FULL) -> SpectralQuantities:
    """Raises DegenerateChain when the full ratio is undefined and method is full."""
    method = LambdaMethod(method)
    kappa, phi = kappa_phi(kind, params, mixture, w)
    lower = degenerate_lambda(params, mixture, w)
    if method is LambdaMethod.FULL:
        lam, clamped = clamp_lambda(raw_spectral_lambda(mixture, kappa, phi))
    elif method is LambdaMethod.DEGENERATE:
        lam, clamped = clamp_lambda(lower)
    else:
        lam, clamped = clamp_lambda(literal_degenerate_lambda(params, w))
    return SpectralQuantities(kappa=kappa, phi=phi, lam=lam, lambda_lower=lower,
                              method=method, clamped=clamped)

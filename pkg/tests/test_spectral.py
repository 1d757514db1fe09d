import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from swagg.errors import DegenerateChain
from swagg.oracle import simulate_chain
from swagg.spectral import (LAMBDA_CEILING, LambdaMethod, clamp_lambda, degenerate_lambda,
                            enumerate_kappa_phi, hoeffding_alpha, kappa_phi,
                            literal_degenerate_lambda, raw_spectral_lambda, spectral_lambda,
                            spectral_quantities)
from swagg.window_model import incoming_probs, next_state_coeffs, stationary_mixture

from conftest import make_params


def brute_kappa_phi(kind, w, p, m=1, poisson=False):
    """Enumerate every (n, a, b) situation independently of the library."""
    p = float(p)
    N = m * w
    if poisson:
        weights = [stats.poisson.pmf(n, w * p) for n in range(N + 1)]
        tot = sum(weights)
        weights = [x / tot for x in weights]
        inc = [stats.poisson.pmf(b, p) for b in range(m)]
        inc.append(1.0 - sum(inc))
    else:
        weights = [math.comb(w, n) * p ** n * (1 - p) ** (w - n) for n in range(w + 1)]
        inc = [1 - p, p]
    k = f = 0.0
    for n in range(N + 1):
        for a in range(n + 1):
            if poisson:
                pa = math.comb(n, a) * (1 / w) ** a * (1 - 1 / w) ** (n - a)
            else:
                if a > 1:
                    break
                pa = n / w if a == 1 else 1 - n / w
            for b, pb in enumerate(inc):
                if kind == "sum":
                    kx, km = (1.0 if n == 0 else (n - a) / n), float(b)
                else:
                    d = n - a + b
                    kx, km = (1.0, 0.0) if d == 0 else ((n - a) / d, b / d)
                k += weights[n] * pa * pb * kx
                f += weights[n] * pa * pb * km
    return k, f


def kp(kind, P, w):
    return kappa_phi(kind, P, stationary_mixture(kind, P, w), w)


def test_frozen_binomial_avg_w2():
    # exact rationals from the situation enumeration: kappa = 5/8, phi = 3/8
    k, f = kp("avg", make_params(p=0.5), 2)
    assert k == pytest.approx(float(Fraction(5, 8)), abs=1e-15)
    assert f == pytest.approx(float(Fraction(3, 8)), abs=1e-15)


def test_p_zero_frozen_chain():
    for kind in ("sum", "avg"):
        assert kp(kind, make_params(p=0.0), 4) == pytest.approx((1.0, 0.0))
        assert kp(kind, make_params("poisson", p=0.0, m=3), 4) == pytest.approx((1.0, 0.0))


@pytest.mark.parametrize("w", [1, 2, 3, 7, 20])
def test_always_sum(w):
    assert kp("sum", make_params("always"), w) == pytest.approx(((w - 1) / w, 1.0), abs=1e-14)


@given(st.sampled_from(["sum", "avg"]), st.integers(1, 10), st.floats(0.0, 1.0))
def test_binomial_matches_brute_force(kind, w, p):
    assert kp(kind, make_params(p=p), w) == pytest.approx(brute_kappa_phi(kind, w, p),
                                                          abs=1e-12)


@given(st.sampled_from(["sum", "avg"]), st.integers(1, 6), st.floats(0.0, 3.0),
       st.integers(1, 4))
def test_poisson_matches_brute_force(kind, w, p, m):
    got = kp(kind, make_params("poisson", p=p, m=m), w)
    assert got == pytest.approx(brute_kappa_phi(kind, w, p, m, poisson=True), abs=1e-10)


@given(st.sampled_from(["sum", "avg"]), st.sampled_from(["binomial", "poisson"]),
       st.integers(1, 15), st.floats(0.0, 2.0), st.integers(1, 5))
def test_kappa_phi_nonnegative(kind, akind, w, p, m):
    P = make_params(akind, p=min(p, 1.0) if akind == "binomial" else p, m=m)
    k, f = kp(kind, P, w)
    assert k >= 0 and f >= 0


def test_restricted_enumeration_matches_table():
    for kind in ("sum", "avg"):
        for w in range(1, 11):
            for p in np.linspace(0, 1, 11):
                P = make_params(p=p)
                mx = stationary_mixture(kind, P, w)
                got = enumerate_kappa_phi(kind, mx.weights, w, incoming_probs(P), True)
                assert got == pytest.approx(kappa_phi(kind, P, mx, w), abs=1e-10)


def integral_lambda(kind, P, w):
    """Both inner products by numerical quadrature over each mixture component."""
    mx = stationary_mixture(kind, P, w)
    k, f = brute_kappa_phi(kind, w, P.p)
    mubar = mx.mean
    num = den = 0.0
    for n, a in enumerate(mx.weights):
        mean, sd = mx.scale_means[n] * P.mu, math.sqrt(mx.scale_vars[n]) * P.sigma
        if sd == 0:
            num += a * (k * mean + f * P.mu - mubar) ** 2
            den += a * (mean - mubar) ** 2
            continue
        pdf = stats.norm(mean, sd).pdf
        lim = (mean - 12 * sd, mean + 12 * sd)
        num += a * integrate.quad(lambda x: (k * x + f * P.mu - mubar) ** 2 * pdf(x), *lim,
                                  epsabs=1e-13)[0]
        den += a * integrate.quad(lambda x: (x - mubar) ** 2 * pdf(x), *lim, epsabs=1e-13)[0]
    return math.sqrt(num / den)


def test_frozen_lambda_binomial_sum_w2():
    # value from the quadrature oracle above, frozen
    P = make_params(p=0.5, mu=1.0, sigma=1.0)
    mx = stationary_mixture("sum", P, 2)
    lam = spectral_lambda(mx, *kappa_phi("sum", P, mx, 2))
    assert lam == pytest.approx(0.6332785063987776, rel=1e-12)
    assert integral_lambda("sum", P, 2) == pytest.approx(lam, rel=1e-9)


@pytest.mark.parametrize("kind,w,p,mu,sigma", [
    ("sum", 5, 0.4, 10.0, 2.0), ("avg", 5, 0.4, 10.0, 2.0), ("avg", 3, 0.8, -2.0, 0.5),
    ("sum", 8, 0.1, 0.3, 4.0),
])
def test_lambda_matches_quadrature(kind, w, p, mu, sigma):
    P = make_params(p=p, mu=mu, sigma=sigma)
    mx = stationary_mixture(kind, P, w)
    lam = raw_spectral_lambda(mx, *kappa_phi(kind, P, mx, w))
    assert lam == pytest.approx(integral_lambda(kind, P, w), rel=1e-8)


@pytest.mark.parametrize("w", [2, 5, 50])
def test_always_sum_lambda(w):
    P = make_params("always", mu=3.0, sigma=1.0)
    mx = stationary_mixture("sum", P, w)
    assert spectral_lambda(mx, *kappa_phi("sum", P, mx, w)) == pytest.approx((w - 1) / w,
                                                                           abs=1e-12)


def test_p_zero_degenerate():
    P = make_params(p=0.0)
    mx = stationary_mixture("sum", P, 3)
    with pytest.raises(DegenerateChain):
        raw_spectral_lambda(mx, *kappa_phi("sum", P, mx, 3))
    with pytest.raises(DegenerateChain):
        spectral_quantities("sum", P, mx, 3)


def test_clamp():
    assert clamp_lambda(1.5) == (LAMBDA_CEILING, True)
    assert clamp_lambda(0.3) == (0.3, False)
    assert clamp_lambda(-0.1) == (0.0, True)
    assert hoeffding_alpha(0.0) == 1.0
    assert hoeffding_alpha(0.5) == 3.0


def test_degenerate_lambda_examples():
    P = make_params(p=0.5)
    assert degenerate_lambda(P, stationary_mixture("sum", P, 2), 2) == pytest.approx(0.25)
    P1 = make_params(p=1.0)
    assert degenerate_lambda(P1, stationary_mixture("sum", P1, 4), 4) == 0.0
    P0 = make_params(p=0.0)
    assert degenerate_lambda(P0, stationary_mixture("sum", P0, 4), 4) == 1.0
    A = make_params("always")
    assert degenerate_lambda(A, stationary_mixture("sum", A, 4), 4) == 0.0
    Q = make_params("poisson", p=0.7, m=3)
    mx = stationary_mixture("sum", Q, 3)
    ref = sum(a * (2 / 3) ** n for n, a in enumerate(mx.weights)) * math.exp(-0.7)
    assert degenerate_lambda(Q, mx, 3) == pytest.approx(ref)


def test_literal_degenerate_flag():
    P = make_params(p=0.5)
    assert literal_degenerate_lambda(P, 2) == pytest.approx(0.75)
    mx = stationary_mixture("sum", P, 2)
    q = spectral_quantities("sum", P, mx, 2, LambdaMethod.LITERAL_DEGENERATE)
    assert q.lam == pytest.approx(0.75)
    # the unweighted sum can leave [0, 1); the clamp catches it
    q = spectral_quantities("sum", make_params(p=0.05), stationary_mixture("sum", make_params(p=0.05), 6), 6,
                            "literal-degenerate")
    assert q.lam == LAMBDA_CEILING and q.clamped


def test_quantities_methods():
    P = make_params(p=0.4)
    mx = stationary_mixture("avg", P, 5)
    full = spectral_quantities("avg", P, mx, 5, "full")
    deg = spectral_quantities("avg", P, mx, 5, "degenerate")
    assert full.method is LambdaMethod.FULL and deg.method is LambdaMethod.DEGENERATE
    assert deg.lam == pytest.approx(full.lambda_lower)
    assert full.alpha >= 1.0
    assert 0 <= full.lam < 1


@given(st.sampled_from(["sum", "avg"]), st.sampled_from(["binomial", "poisson"]),
       st.integers(1, 30), st.floats(0.01, 0.99), st.floats(-50, 50), st.floats(0.01, 20),
       st.floats(0.01, 100))
def test_lambda_in_range_and_scale_invariant(kind, akind, w, p, mu, sigma, t):
    P = make_params(akind, p=p, m=3, mu=mu, sigma=sigma)
    mx = stationary_mixture(kind, P, w)
    try:
        q = spectral_quantities(kind, P, mx, w)
    except DegenerateChain:
        return
    assert 0.0 <= q.lam < 1.0
    assert 0.0 <= q.lambda_lower <= 1.0
    Pt = make_params(akind, p=p, m=3, mu=t * mu, sigma=t * sigma)
    qt = spectral_quantities(kind, Pt, stationary_mixture(kind, Pt, w), w)
    assert qt.lam == pytest.approx(q.lam, abs=1e-10)


def test_full_vs_degenerate_sweep():
    # the degenerate value is expected below the full one; count violations only
    violations = total = 0
    rng = np.random.default_rng(0)
    for _ in range(300):
        w, p = int(rng.integers(1, 21)), float(rng.uniform(0.01, 0.99))
        ratio = 10 ** rng.uniform(-1, 2)
        for kind in ("sum", "avg"):
            P = make_params(p=p, mu=ratio, sigma=1.0)
            mx = stationary_mixture(kind, P, w)
            try:
                q = spectral_quantities(kind, P, mx, w)
            except DegenerateChain:
                continue
            total += 1
            violations += q.lam < q.lambda_lower
    assert total > 500
    print(f"full < degenerate in {violations}/{total} draws")


@pytest.mark.slow
def test_one_step_preserves_stationary_mean():
    P = make_params(p=0.4, mu=5.0, sigma=2.0)
    for kind in ("sum", "avg"):
        mx = stationary_mixture(kind, P, 5)
        s = simulate_chain(kind, P, 5, 300000, seed=11)
        # one step from each component, situation by situation
        stepped = 0.0
        for n, an in enumerate(mx.weights):
            for a in (0, 1):
                pa = n / 5 if a == 1 else 1 - n / 5
                for b, pb in ((0, 0.6), (1, 0.4)):
                    kx, km = next_state_coeffs(kind, n, a, b)
                    stepped += an * pa * pb * (kx * mx.scale_means[n] * P.mu + km * P.mu)
        if kind == "sum":
            assert stepped == pytest.approx(mx.mean, rel=1e-12)
        se = s.values.std() / math.sqrt(len(s.values)) * math.sqrt(10)
        assert abs(s.values.mean() - mx.mean) < 3 * se

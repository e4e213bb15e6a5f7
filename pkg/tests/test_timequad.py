import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ive

from oracles import scaled_bessel_series

from latticeharm.lattice import DomainError
from latticeharm.timequad import (hankel_coefficients, heat_time_integral,
                                  origin_complement_integral, split_points, taylor_coefficients)


def test_taylor_coefficients_reproduce_series():
    a = taylor_coefficients(5)
    for m in range(6):
        for t in (0.01, 0.05):
            approx = sum(a[m, p] * t ** p for p in range(a.shape[1]))
            assert approx == pytest.approx(scaled_bessel_series(m, 2 * t), rel=1e-14, abs=1e-300)
    assert not a.flags.writeable


def test_hankel_coefficients_reproduce_large_time():
    h = hankel_coefficients(4)
    t = 400.0
    for m in range(5):
        approx = sum(h[m, k] * t ** -k for k in range(h.shape[1])) / math.sqrt(4 * math.pi * t)
        assert approx == pytest.approx(scaled_bessel_series(m, 2 * t, terms=3000), rel=1e-13)


# scipy's ive returns nan for arguments beyond about 1e10
EDGES = [-60, -5, 0, 3, 6, 10, 20]
T_END = math.exp(EDGES[-1])


def leading_tail(beta, n=0, c=0.0):
    # int_T^inf (4 pi t)^{-1/2} (1 - mu/t) (1 - c/t) t^{beta-1} dt, dropped terms are O(T^-2)
    mu = (4 * n * n - 1) / 16
    return (4 * math.pi) ** -0.5 * (T_END ** (beta - 0.5) / (0.5 - beta)
                                    - (mu + c) * T_END ** (beta - 1.5) / (1.5 - beta))


def ref_time_integral(n, beta, c=0.0):
    """int_0^inf exp(-2t) I_n(2t) t^{beta-1} exp(-c/t) dt with scipy's ive and quad (N = 1).

    Integrated in u = log t, where both ends decay exponentially.
    """
    def f(u):
        t = math.exp(u)
        return ive(n, 2 * t) * math.exp(beta * u - c / t)
    body = sum(quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0] for a, b in zip(EDGES, EDGES[1:]))
    return body + leading_tail(beta, n, c)


def mellin_closed_form(n, beta):
    """int_0^inf exp(-2t) I_n(2t) t^{beta-1} dt by the Gamma-function formula at 30 digits.

    For -1 < beta < 0 and n = 0 this is the analytic continuation, equal to minus the
    integral of (1 - G_t(0)) t^{beta-1}.
    """
    with mp.workdps(30):
        b = mp.mpf(beta)
        v = 4 ** -b * mp.gamma(n + b) * mp.gamma(0.5 - b) / (mp.sqrt(mp.pi) * mp.gamma(1 + n - b))
    return float(v)


@pytest.mark.parametrize("beta", [0.25, 0.1, -0.3])
def test_time_integral_against_closed_form(beta):
    r = heat_time_integral(6, 1, beta)
    for n in range(0 if beta > 0 else 1, 7):
        assert r.values[6 + n] == pytest.approx(mellin_closed_form(n, beta), rel=1e-12)


@pytest.mark.parametrize("beta,c", [(-0.5, 0.3), (-0.5, 4.0), (0.1, 1.0)])
def test_time_integral_against_reference(beta, c):
    r = heat_time_integral(6, 1, beta, c=c)
    for n in (1, 3, 6):
        assert r.values[6 + n] == pytest.approx(ref_time_integral(n, beta, c), rel=1e-9)
    if c > 0 or beta > 0:
        assert r.values[6] == pytest.approx(ref_time_integral(0, beta, c), rel=1e-9)


def test_error_estimate_and_reflection():
    r = heat_time_integral(10, 2, 0.5, estimate_error=True)
    assert r.error_estimate < 1e-10
    v = r.values
    np.testing.assert_array_equal(v, v[::-1, :])
    np.testing.assert_allclose(v, v.T, rtol=1e-15)


def test_origin_exclusion():
    r = heat_time_integral(3, 1, -0.4, origin_ok=False)
    assert r.values[3] == 0.0 and np.all(r.values[[0, 1, 2, 4, 5, 6]] > 0)


def test_origin_complement():
    for beta in (-0.5, -0.2, -0.8):
        ref = -mellin_closed_form(0, beta)
        assert origin_complement_integral(1, beta) == pytest.approx(ref, rel=1e-12)
    with pytest.raises(DomainError):
        origin_complement_integral(1, 0.5)


def test_domain_errors():
    with pytest.raises(DomainError):
        heat_time_integral(3, 1, 0.5)
    with pytest.raises(DomainError):
        heat_time_integral(3, 1, 0.1, c=-1.0)
    with pytest.raises(DomainError):
        heat_time_integral(-1, 1, 0.1)


def test_split_points():
    lo, hi = split_points(10)
    assert lo == 0.05 and hi == pytest.approx(16 * 101)
    lo, hi = split_points(0, c=0.9)
    assert lo == pytest.approx(0.02) and hi > 16

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from oracles import half_integer_closed_form, scaled_bessel_series

from latticeharm.bessel import (DomainError, am_gm_sides, bessel_ratio, bessel_ratio_certified,
                                evaluate, inequality_margin, inequality_ratio, log_scaled_bessel_i,
                                miller_table, normalized_bessel, ratio_bound_f, ratio_bound_g,
                                scaled_bessel_i)


def mp_scaled(a, x):
    with mp.workdps(40):
        return float(mp.besseli(a, x) * mp.exp(-x))


# ---------------------------------------------------------------- values

def test_value_examples():
    assert scaled_bessel_i(0, 0.0) == 1.0
    assert scaled_bessel_i(1, 0.0) == 0.0
    assert scaled_bessel_i(0, 2.0) == pytest.approx(0.308508322553671, rel=1e-13)
    assert scaled_bessel_i(0, 2.0) == pytest.approx(scaled_bessel_series(0, 2.0), rel=1e-14)


def test_negative_integer_orders():
    x = np.linspace(0.1, 40, 50)
    for k in range(1, 8):
        np.testing.assert_array_equal(scaled_bessel_i(-k, x), scaled_bessel_i(k, x))


def test_domain_errors():
    with pytest.raises(DomainError):
        scaled_bessel_i(-1.5, 1.0)
    with pytest.raises(DomainError):
        scaled_bessel_i(0.5, -1.0)
    with pytest.raises(DomainError):
        bessel_ratio(0.0, 0.0)


def test_half_integer_closed_forms():
    for x in (1e-3, 0.7, 5.0, 31.0, 300.0, 5000.0):
        plus, minus = half_integer_closed_form(x)
        assert scaled_bessel_i(0.5, x) == pytest.approx(plus, rel=1e-13)
        assert scaled_bessel_i(-0.5, x) == pytest.approx(minus, rel=1e-13)


def test_against_mpmath_wide_range():
    rng = np.random.default_rng(0)
    for _ in range(150):
        a = float(rng.choice([rng.uniform(-0.99, 10), rng.uniform(10, 1000), float(rng.integers(0, 1000))]))
        x = float(10 ** rng.uniform(-3, 4))
        ref = mp_scaled(a, x)
        if ref > 1e-300:
            assert scaled_bessel_i(a, x) == pytest.approx(ref, rel=1e-12)


def test_method_tags():
    assert evaluate(0.3, 2.0).method == "series"
    assert evaluate(3, 50.0).method == "recurrence"
    assert evaluate(2.5, 100.0).method == "integral"
    assert evaluate(0.0, 1.0).value == scaled_bessel_i(0, 1.0)


def test_batch_equals_scalar():
    rng = np.random.default_rng(1)
    a = np.concatenate([rng.integers(0, 30, 40).astype(float), rng.uniform(-0.9, 20, 40)])
    x = rng.uniform(0, 200, 80)
    batch = scaled_bessel_i(a, x)
    scalar = np.array([scaled_bessel_i(ai, xi) for ai, xi in zip(a, x)])
    np.testing.assert_array_equal(batch, scalar)


def test_log_scaled_survives_underflow():
    a, x = 400.0, 0.5
    ref = float(mp.log(mp.besseli(a, x)) - x)
    assert log_scaled_bessel_i(a, x) == pytest.approx(ref, rel=1e-12)


def test_integer_order_normalization_and_range():
    for t in (1e-3, 0.5, 3.0, 40.0, 900.0):
        g = miller_table(int(t + 20 * math.sqrt(t) + 60), t)
        assert abs(g[0] + 2 * g[1:].sum() - 1.0) < 1e-13
        assert np.all((g >= 0) & (g <= 1))


def test_order_monotonicity():
    rng = np.random.default_rng(2)
    a = rng.uniform(0.0, 30, 10_000)
    b = a + rng.uniform(1e-3, 5, a.size)
    x = 10 ** rng.uniform(-2, 3, a.size)
    va, vb = scaled_bessel_i(a, x), scaled_bessel_i(b, x)
    keep = vb > 1e-290
    assert np.all(va[keep] > vb[keep])


def test_order_monotonicity_fails_for_negative_orders():
    # I_{-v} = I_v + (2/pi) sin(v pi) K_v, so I_{-v} and I_v merge at large x
    a, b, x = -0.4, 0.1, 60.0
    with mp.workdps(30):
        assert mp.besseli(a, x) < mp.besseli(b, x)
    assert scaled_bessel_i(a, x) < scaled_bessel_i(b, x)
    assert scaled_bessel_i(a, x) == pytest.approx(mp_scaled(a, x), rel=1e-12)


@pytest.mark.parametrize("t", [0.3, 2.0, 15.0])
@pytest.mark.parametrize("u", [0.5, 0.8, 1.0, 1.7, 2.0])
def test_generating_function(t, u):
    K = 80
    k = np.arange(-K, K + 1)
    lhs = np.sum(u ** k * scaled_bessel_i(np.abs(k), t))
    assert lhs == pytest.approx(math.exp(t * (u + 1 / u) / 2 - t), rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 50), st.floats(0.01, 50), st.integers(0, 20))
def test_neumann_identity(x, y, n):
    K = int(x + y + 10 * math.sqrt(x + y) + 40)
    k = np.arange(-K, K + 1)
    rhs = np.sum(scaled_bessel_i(np.abs(k), x) * scaled_bessel_i(np.abs(n - k), y))
    assert abs(scaled_bessel_i(n, x + y) - rhs) < 1e-14


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_cosine_integral_representation():
    for t in (0.5, 7.0, 40.0, 100.0):
        for n in (0, 1, 5, 20, 50):
            ref = quad(lambda th: math.exp(t * (math.cos(th) - 1)) * math.cos(n * th), 0, math.pi,
                       epsabs=1e-14, epsrel=1e-13, limit=200)[0] / math.pi
            assert abs(scaled_bessel_i(n, t) - ref) < 1e-10


def test_large_order_asymptotic():
    nu, t = 200.0, 1.0
    log_ratio = (log_scaled_bessel_i(nu, t) + t) - (-0.5 * math.log(2 * math.pi * nu)
                                                      + nu * math.log(math.e * t / (2 * nu)))
    assert 0.9 <= math.exp(log_ratio) <= 1.1


# ---------------------------------------------------------------- ratios

def test_ratio_examples():
    assert bessel_ratio(0.0, 2.0) == pytest.approx(0.697774657964008, rel=1e-12)
    r, err = bessel_ratio_certified(0.0, 2.0, tol=1e-14)
    assert err <= 1e-14 * r and abs(r - mp_scaled(1, 2) / mp_scaled(0, 2)) <= 2e-14


def test_ratio_bounds_on_random_points():
    rng = np.random.default_rng(3)
    a = rng.uniform(-0.5, 20, 1000)
    x = 10 ** rng.uniform(-2, 3, 1000)
    r = bessel_ratio(a, x)
    assert np.all(r < 1)
    assert np.all(ratio_bound_f(a + 1, x) < r) and np.all(r < ratio_bound_f(a + 0.5, x))


def test_ratio_bound_pair():
    alpha = np.array([0.1, 1.0, 5.0])
    x = np.array([0.2, 3.0, 100.0])
    f, g = ratio_bound_f(alpha, x), ratio_bound_g(alpha, x)
    assert np.all((0 < f) & (f < 1))
    np.testing.assert_allclose(f + g, 1.0, rtol=1e-15)


# ---------------------------------------------------------------- normalized form and inequalities

def test_normalized_bessel():
    assert normalized_bessel(3.7, 0.0) == 1.0
    x = 2.0
    closed = math.gamma(1.5) * math.sqrt(2) / math.sqrt(x) * math.sqrt(2 / (math.pi * x)) * math.sinh(x)
    assert normalized_bessel(0.5, x) == pytest.approx(closed, rel=1e-13)


def test_am_gm_example():
    lo, mid, up = am_gm_sides(np.array([0.0, 1.0]), 2.0)
    # I_0(2) I_1(2) and I_{1/2}(2)^2 after dropping exp(-2x), against the series oracle
    prod = scaled_bessel_series(0, 2.0) * scaled_bessel_series(1, 2.0) * math.exp(4)
    assert math.exp(mid + 4) == pytest.approx(prod, rel=1e-12)
    assert prod == pytest.approx(3.62599, abs=1e-5)
    assert math.exp(up + 4) == pytest.approx(scaled_bessel_series(0.5, 2.0) ** 2 * math.exp(4), rel=1e-12)
    assert math.exp(up + 4) == pytest.approx(4.1871, abs=2e-4)
    assert inequality_margin("am-gm", x=2.0, orders=np.array([0.0, 1.0])) > 0


def test_am_gm_equal_orders_collapse():
    r = inequality_ratio("am-gm", None, 3.0, orders=np.array([1.3, 1.3, 1.3]))
    assert r == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-0.5, 15), min_size=2, max_size=5), st.floats(0.01, 200))
def test_am_gm_random_tuples(orders, x):
    n = len(orders)
    m = sum(orders) / n
    lhs = n * math.log(normalized_bessel(m, x))
    rhs = sum(math.log(normalized_bessel(a, x)) for a in orders)
    assert lhs <= rhs + 1e-10 * (1 + abs(rhs))


def test_diff1_example():
    i0, i1 = scaled_bessel_i(0, 1.0), scaled_bessel_i(1, 1.0)
    assert 0 < i0 - i1 < i0
    assert inequality_margin("diff-1", a=0.0, x=1.0) > 0


def test_order_difference_changes_sign_below_minus_half():
    # for -1 < a < -1/2 the consecutive difference I_a - I_{a+1} can be negative
    with mp.workdps(30):
        d1 = mp.besseli(-0.6, 2) - mp.besseli(0.4, 2)
        d2 = mp.besseli(-0.93, 4.19) - mp.besseli(0.07, 4.19)
    assert d1 < 0 and d2 < 0
    got = scaled_bessel_i(-0.6, 2.0) - scaled_bessel_i(0.4, 2.0)
    assert got == pytest.approx(float(d1) * math.exp(-2.0), rel=1e-10)
    assert inequality_ratio("diff-1", -0.6, 2.0) == np.inf
    assert np.isfinite(inequality_ratio("diff-1", -0.6, 2.0, lower_bound=False))
    # at -1/2 the difference is sqrt(2/(pi x)) exp(-x), below rounding of I for large x
    x = np.geomspace(1e-3, 10, 50)
    np.testing.assert_allclose(scaled_bessel_i(-0.5, x) - scaled_bessel_i(0.5, x),
                               np.sqrt(2 / (np.pi * x)) * np.exp(-2 * x), rtol=1e-6, atol=1e-16)
    # above -1/2 it stays positive
    a = np.linspace(-0.49, 5, 200)
    x = np.geomspace(1e-3, 500, 200)
    A, X = np.meshgrid(a, x)
    assert np.all(scaled_bessel_i(A, X) > scaled_bessel_i(A + 1, X))


def test_inequality_domains():
    with pytest.raises(DomainError):
        inequality_ratio("diff-2", -0.7, 1.0)
    with pytest.raises(DomainError):
        inequality_ratio("uniform-order", 1.0, 1.0, alpha=2.0)
    with pytest.raises(DomainError):
        inequality_ratio("nope", 1.0, 1.0)

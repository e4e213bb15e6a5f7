"""Scaled modified Bessel functions of the first kind, ratios and inequality margins.

Everything is computed in the scaled form ``exp(-x) I_a(x)``. Integer orders use
Miller's backward recurrence normalised by ``sum_k exp(-x) I_k(x) = 1``.
Non-integer orders use the power series for ``x <= 30``. For larger ``x`` they
use a Gauss-Laguerre rule for an anchor order in (-1/2, 1/2], a continued
fraction for the top ratio, and a stable backward recurrence between the two.

All evaluators work element by element with fixed per-element operation
sequences, so an array call returns exactly the values of the scalar calls.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_genlaguerre, gamma

from .lattice import DomainError

SERIES_MAX_X = 30.0
SMALL_X = 1e-3
_RESCALE = 1e250
_LAGUERRE_NODES = 40


# ---------------------------------------------------------------------------
# validation helpers

def _prep(a, x):
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    if np.any(~np.isfinite(a)) or np.any(~np.isfinite(x)):
        raise DomainError("order and argument must be finite")
    if np.any(x < 0):
        raise DomainError("requires argument x >= 0")
    isint = a == np.round(a)
    if np.any((a <= -1) & ~isint):
        raise DomainError("requires order a > -1 (negative integers allowed via I_{-k} = I_k)")
    # I_{-k} = I_k for integers
    a = np.where(isint, np.abs(a), a)
    return a, x, isint


# ---------------------------------------------------------------------------
# building blocks, all on flat arrays

def _series(a, x):
    """Power series sum_k (x/2)^{2k+a} / (k! Gamma(a+k+1)) times exp(-x)."""
    n = a.size
    out = np.zeros(n)
    if n == 0:
        return out
    q = (0.5 * x) ** 2
    term = np.ones(n)
    s = np.ones(n)
    active = q > 0
    k = 0
    while np.any(active):
        k += 1
        nxt = term * q / (k * (k + a))
        s = np.where(active, s + nxt, s)
        term = np.where(active, nxt, term)
        # past the peak term and negligible
        done = (k * (k + a) > q) & (nxt <= 1e-17 * s)
        active = active & ~done
    # x = 0 gives 0 * log 0 for a = 0; those entries are replaced below
    with np.errstate(divide="ignore", invalid="ignore"):
        logpre = a * np.log(0.5 * x) - x - gammaln(a + 1.0)
    out = np.exp(logpre) * s
    out = np.where(x == 0, np.where(a == 0, 1.0, np.where(a > 0, 0.0, np.inf)), out)
    return out


def _log_series(a, x):
    """log of the scaled series; valid where the sum itself does not overflow."""
    q = (0.5 * x) ** 2
    term = np.ones(a.size)
    s = np.ones(a.size)
    active = q > 0
    k = 0
    while np.any(active):
        k += 1
        nxt = term * q / (k * (k + a))
        s = np.where(active, s + nxt, s)
        term = np.where(active, nxt, term)
        active = active & ~((k * (k + a) > q) & (nxt <= 1e-17 * s))
    with np.errstate(divide="ignore"):
        return a * np.log(0.5 * x) - x - gammaln(a + 1.0) + np.log(s)


def _miller_start(m, x):
    return (m + 20 + np.ceil(10.0 * np.sqrt(x))).astype(np.int64)


def _miller(m, x):
    """Scaled I_m(x) for integer m >= 0 and x > 0 by normalised backward recurrence."""
    n = m.size
    if n == 0:
        return np.zeros(0)
    m = m.astype(np.int64)
    K = _miller_start(m, x)
    vp = np.zeros(n)
    vc = np.zeros(n)
    S = np.zeros(n)
    rec = np.zeros(n)
    for k in range(int(K.max()), 0, -1):
        start = K == k
        vc = np.where(start, 1.0, vc)
        vp = np.where(start, 0.0, vp)
        S = S + 2.0 * vc
        rec = np.where(m == k, vc, rec)
        vn = vp + (2.0 * k / x) * vc
        vp, vc = vc, vn
        big = vc > _RESCALE
        if np.any(big):
            f = np.where(big, 1.0 / _RESCALE, 1.0)
            vp, vc, S, rec = vp * f, vc * f, S * f, rec * f
    S = S + vc
    rec = np.where(m == 0, vc, rec)
    return rec / S


def miller_table(kmax: int, x) -> np.ndarray:
    """Scaled I_k(x) for k = 0..kmax at each x; shape (kmax + 1,) + shape(x).

    Uses one backward sweep per argument, normalised by
    exp(-x) (I_0(x) + 2 sum_{k>=1} I_k(x)) = 1. Arguments below 1e-3 use the
    power series order by order.
    """
    x = np.asarray(x, dtype=float)
    shp = x.shape
    xf = x.ravel()
    if np.any(xf < 0):
        raise DomainError("requires argument x >= 0")
    out = np.zeros((kmax + 1, xf.size))
    small = xf < SMALL_X
    big = ~small
    if np.any(small):
        xs = xf[small]
        for k in range(kmax + 1):
            out[k, small] = _series(np.full(xs.size, float(k)), xs)
    if np.any(big):
        xb = xf[big]
        K = int(_miller_start(np.array([kmax]), np.array([xb.max()]))[0])
        # only rows 0..kmax are stored; the recurrence runs on two state rows
        vals = np.zeros((kmax + 1, xb.size))
        # rescale count seen by each stored row; the factors are applied once at the end
        cnt = np.zeros((kmax + 1, xb.size), dtype=np.int64)
        c = np.zeros(xb.size, dtype=np.int64)
        vp = np.zeros(xb.size)
        vc = np.ones(xb.size)
        S = np.zeros(xb.size)
        for k in range(K, 0, -1):
            if k <= kmax:
                vals[k] = vc
                cnt[k] = c
            S = S + 2.0 * vc
            vn = vp + (2.0 * k / xb) * vc
            vp, vc = vc, vn
            b = vc > _RESCALE
            if np.any(b):
                f = np.where(b, 1.0 / _RESCALE, 1.0)
                vp, vc, S = vp * f, vc * f, S * f
                c = c + b
        S = S + vc
        vals[0] = vc
        cnt[0] = c
        lag = np.minimum(c[None, :] - cnt, 2)
        vals = vals * np.power(_RESCALE, -lag.astype(float))
        out[:, big] = vals / S
    return out.reshape((kmax + 1,) + shp)


def _cf_ratio(a, x, tol=1e-16, max_iter=10_000_000):
    """I_{a+1}(x)/I_a(x) by the continued fraction with partial quotients 2(a+k)/x.

    Convergents P_n/Q_n come from the fundamental recurrences. Iteration stops
    once the convergent error bound 1/(Q_n Q_{n+1}) drops below
    ``tol * P_n/Q_n``. Q is renormalised as it grows and its scale is tracked
    in logarithms. Returns (ratio, certified_bound).
    """
    n = a.size
    # n = 0 and n = 1 convergents: P_0 = 0, Q_0 = 1; P_1 = 1, Q_1 = q_1
    Pm, Qm = np.zeros(n), np.ones(n)
    P, Q = np.ones(n), 2.0 * (a + 1.0) / x
    logscale = np.zeros(n)
    active = np.ones(n, dtype=bool)
    ratio = P / Q
    bound = np.full(n, np.inf)
    k = 1
    while np.any(active) and k < max_iter:
        k += 1
        qk = 2.0 * (a + k) / x
        Pn = qk * P + Pm
        Qn = qk * Q + Qm
        # |xi - P_{k-1}/Q_{k-1}| <= 1/(Q_{k-1} Q_k)
        with np.errstate(divide="ignore"):
            logb = -2.0 * logscale - np.log(Q) - np.log(Qn)
        cur = P / Q
        ok = active & (logb < np.log(tol * cur))
        ratio = np.where(ok, cur, ratio)
        bound = np.where(ok, np.exp(logb), bound)
        active = active & ~ok
        Pm, Qm, P, Q = P, Q, Pn, Qn
        s = Q > 1e100
        if np.any(s):
            f = np.where(s, 1e-100, 1.0)
            Pm, Qm, P, Q = Pm * f, Qm * f, P * f, Q * f
            logscale = logscale + np.where(s, 100.0 * np.log(10.0), 0.0)
    return ratio, bound


@lru_cache(maxsize=64)
def _laguerre(alpha: float):
    v, w = roots_genlaguerre(_LAGUERRE_NODES, alpha)
    return v, w


def _anchor(c, x):
    """Scaled I_c(x) for c in (-1/2, 1/2], x > 0, by generalized Gauss-Laguerre.

    exp(-x) I_c(x) = 1/(sqrt(2 pi x) Gamma(c+1/2))
                     * int_0^{2x} e^{-v} v^{c-1/2} (1 - v/(2x))^{c-1/2} dv
    """
    out = np.zeros(c.size)
    for cu in np.unique(c):
        sel = c == cu
        xs = x[sel]
        v, w = _laguerre(float(cu) - 0.5)
        acc = np.zeros(xs.size)
        for vj, wj in zip(v, w):
            inside = vj < 2.0 * xs
            base = np.where(inside, 1.0 - vj / (2.0 * np.where(inside, xs, 1.0)), 1.0)
            acc = acc + np.where(inside, wj * base ** (cu - 0.5), 0.0)
        out[sel] = acc / (np.sqrt(2.0 * np.pi * xs) * gamma(cu + 0.5))
    return out


def _large_real(a, x):
    """Non-integer orders at x > 30: anchor value, top ratio, backward recurrence."""
    n = a.size
    if n == 0:
        return np.zeros(0)
    c = a - np.ceil(a - 0.5)                      # anchor order in (-1/2, 1/2]
    low = a < c                                   # a in (-1, -1/2]: a + 1 == c
    top = np.where(low, c, a)
    steps = np.round(top - c).astype(np.int64)
    r, _ = _cf_ratio(top, x)
    vp = r.copy()          # v_{nu+1}
    vc = np.ones(n)        # v_nu, starting at nu = top
    rec = np.ones(n)       # v_top
    nu = top.copy()
    for j in range(int(steps.max()) if n else 0):
        act = j < steps
        vn = vp + (2.0 * nu / x) * vc
        vp = np.where(act, vc, vp)
        vc = np.where(act, vn, vc)
        nu = np.where(act, nu - 1.0, nu)
        big = vc > _RESCALE
        if np.any(big):
            f = np.where(big, 1.0 / _RESCALE, 1.0)
            vp, vc, rec = vp * f, vc * f, rec * f
    Ic = _anchor(c, x)
    val = Ic * rec / vc
    # orders in (-1, -1/2]: I_a = I_{a+2} + (2(a+1)/x) I_{a+1}, with a+1 = c
    if np.any(low):
        rc = vp / vc   # ratio I_{c+1}/I_c from the recurrence state (steps == 0)
        low_val = Ic * rc + (2.0 * c / x) * Ic
        val = np.where(low, low_val, val)
    return val


def _method_codes(a, x, isint):
    # 0 series, 1 recurrence, 2 integral
    return np.where(isint & (x >= SMALL_X), 1, np.where(~isint & (x > SERIES_MAX_X), 2, 0))


# ---------------------------------------------------------------------------
# public API

def scaled_bessel_i(a, x):
    """exp(-x) I_a(x) for real order a > -1 and x >= 0.

    Integer orders of either sign are accepted (``I_{-k} = I_k``). Arrays
    broadcast; the result for each element does not depend on the others.

    Parameters
    ----------
    a : array_like
        Order, a > -1 or an integer.
    x : array_like
        Argument, x >= 0.

    Returns
    -------
    float or ndarray
        The scaled value. At x = 0 it is 1 for a = 0, 0 for a > 0 and inf for
        non-integer a in (-1, 0).
    """
    a, x, isint = _prep(a, x)
    af, xf, intf = a.ravel(), x.ravel(), isint.ravel()
    code = _method_codes(af, xf, intf)
    out = np.empty(af.size)
    s = code == 0
    out[s] = _series(af[s], xf[s])
    s = code == 1
    out[s] = _miller(af[s].astype(np.int64), xf[s])
    s = code == 2
    out[s] = _large_real(af[s], xf[s])
    out = out.reshape(a.shape)
    return float(out) if out.ndim == 0 else out


def log_scaled_bessel_i(a, x):
    """log(exp(-x) I_a(x)); stays finite where the scaled value underflows."""
    a, x, _ = _prep(a, x)
    with np.errstate(divide="ignore"):
        v = np.log(np.asarray(scaled_bessel_i(a, x), dtype=float))
    bad = (v < -600) & (x > 0)
    if np.any(bad):
        v = np.array(v, dtype=float)
        v[bad] = _log_series(a[bad], x[bad])
    return float(v) if v.ndim == 0 else v


def bessel_ratio(a, x, tol: float = 1e-15):
    """I_{a+1}(x) / I_a(x) by continued fraction with a certified stopping rule.

    The loop stops when the convergent error bound 1/(Q_n Q_{n+1}) falls below
    ``tol`` times the current convergent.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    if np.any(x <= 0):
        raise DomainError("requires argument x > 0")
    if np.any(a <= -1):
        raise DomainError("requires order a > -1")
    r, _ = _cf_ratio(a.ravel(), x.ravel(), tol=tol)
    r = r.reshape(a.shape)
    return float(r) if r.ndim == 0 else r


def bessel_ratio_certified(a: float, x: float, tol: float = 1e-15):
    """Return (ratio, error_bound) for a single order and argument."""
    if x <= 0 or a <= -1:
        raise DomainError("requires a > -1 and x > 0")
    r, b = _cf_ratio(np.array([float(a)]), np.array([float(x)]), tol=tol)
    return float(r[0]), float(b[0])


def normalized_bessel(a, x):
    """2^a Gamma(a+1) x^{-a} I_a(x); equals 1 at x = 0."""
    a, x, _ = _prep(a, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = log_scaled_bessel_i(a, x)
        v = np.exp(a * np.log(2.0) + gammaln(a + 1.0) - a * np.log(x) + lg + x)
    v = np.where(x == 0, 1.0, v)
    return float(v) if np.ndim(v) == 0 else v


def ratio_bound_f(alpha, x):
    """f_alpha(x) = x / (alpha + sqrt(alpha^2 + x^2))."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    return x / (alpha + np.hypot(alpha, x))


def ratio_bound_g(alpha, x):
    """g_alpha(x) = 1 - f_alpha(x), written without cancellation."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    return 2.0 * alpha / (alpha + x + np.hypot(alpha, x))


@dataclass(frozen=True)
class ScaledBessel:
    """Evaluation record for exp(-x) I_a(x)."""

    order: float
    argument: float
    value: float
    method: str


_METHOD_NAMES = {0: "series", 1: "recurrence", 2: "integral"}


def evaluate(a: float, x: float) -> ScaledBessel:
    """Scalar evaluation with the method tag used."""
    aa, xx, isint = _prep(a, x)
    code = int(_method_codes(aa.ravel(), xx.ravel(), isint.ravel())[0])
    return ScaledBessel(float(a), float(x), float(scaled_bessel_i(a, x)), _METHOD_NAMES[code])


# ---------------------------------------------------------------------------
# inequality margins

INEQUALITY_KINDS = ("am-gm", "diff-1", "diff-2", "diff-3", "ratio-bounds", "uniform-order")


def _rel_terms(a, x, m):
    """Ratios I_{a+j}/I_a for j = 1..m, computed from scaled values."""
    base = scaled_bessel_i(a, x)
    return [np.asarray(scaled_bessel_i(a + j, x)) / base for j in range(1, m + 1)]


def am_gm_sides(orders, x):
    """Log of the three members of the AM-GM chain for orders a_1..a_n at x > 0.

    Returns (lower, middle, upper) with
    lower = n log Gamma(m+1) - sum log Gamma(a_i+1) + n log I_m(x),
    middle = sum log I_{a_i}(x), upper = n log I_m(x), where m is the mean
    order. The common factor exp(-n x) is dropped from all three.
    """
    orders = np.asarray(orders, dtype=float)
    x = np.asarray(x, dtype=float)
    n = orders.shape[-1]
    mean = orders.mean(axis=-1)
    lm = log_scaled_bessel_i(mean, x)
    mid = sum(log_scaled_bessel_i(orders[..., i], x) for i in range(n))
    up = n * lm
    low = n * gammaln(mean + 1.0) - gammaln(orders + 1.0).sum(axis=-1) + n * lm
    return low, mid, up


def inequality_ratio(kind: str, a, x, alpha=None, orders=None, lower_bound=True):
    """Ratio lhs/rhs-structure for each sampled point; <= C certifies the inequality.

    For the constant-free inequalities the structure is the full right-hand
    side, so the certifying value is C = 1. For "diff-1" the positivity of
    I_a - I_{a+1} is enforced (inf on failure) where ``lower_bound`` is true;
    it may be a boolean array matching the sample.
    """
    a = np.asarray(a, dtype=float) if a is not None else None
    x = np.asarray(x, dtype=float)
    if kind == "am-gm":
        low, mid, up = am_gm_sides(orders, x)
        # both ratios must be <= 1
        return np.maximum(np.exp(low - mid), np.exp(mid - up))
    if kind == "diff-1":
        _check(np.all(a > -1), "requires a > -1")
        (r1,) = _rel_terms(a, x, 1)
        lhs = 1.0 - r1
        # lower bound 0 < lhs is encoded by returning inf for violations
        bad = (lhs <= 0) & np.asarray(lower_bound, dtype=bool)
        return np.where(bad, np.inf, lhs / ((a + 1.0) / x))
    if kind == "diff-2":
        _check(np.all(a >= -0.5), "requires a >= -1/2")
        r1, r2 = _rel_terms(a, x, 2)
        lhs = np.abs(1.0 - 2.0 * r1 + r2)
        return lhs / (1.5 / x + (a + 1.0) * (a + 2.0) / x ** 2)
    if kind == "diff-3":
        _check(np.all(a >= -0.5), "requires a >= -1/2")
        r1, r2, r3 = _rel_terms(a, x, 3)
        lhs = np.abs(1.0 - 3.0 * r1 + 3.0 * r2 - r3)
        return lhs / ((a + 2.0) / x ** 2 + (a + 1.0) * (a + 2.0) * (a + 3.0) / x ** 3)
    if kind == "ratio-bounds":
        _check(np.all(a >= -0.5), "requires a >= -1/2")
        r = np.asarray(bessel_ratio(a, x))
        lo = ratio_bound_f(a + 1.0, x)
        hi = ratio_bound_f(a + 0.5, x)
        return np.maximum(lo / r, r / hi)
    if kind == "uniform-order":
        alpha = np.asarray(alpha, dtype=float)
        _check(np.all((alpha >= -0.5) & (alpha < a)), "requires -1/2 <= alpha < a")
        lv = log_scaled_bessel_i(a, x)
        return np.exp(-alpha * np.log(x) + lv + (2.0 * alpha + 1.0) * np.log(a + 1.0))
    raise DomainError(f"unknown inequality kind {kind!r}")


def _check(ok, msg):
    if not ok:
        raise DomainError(msg)


def inequality_margin(kind: str, a=None, x=None, C: float = 1.0, alpha=None, orders=None) -> float:
    """Minimal relative margin C - ratio over the sample; >= 0 certifies the grid."""
    r = inequality_ratio(kind, a, x, alpha=alpha, orders=orders)
    return float(np.min(C - r))

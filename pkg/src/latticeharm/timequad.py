"""Time integrals of the heat kernel over a whole lattice window.

Computes, for every n in a box window,

    J(n) = int_0^inf G_{t,N}(n) t^{beta-1} exp(-c/t) dt

by splitting the time axis in three parts:

* [0, t_lo]: Taylor polynomial of exp(-2t) I_m(2t) multiplied across axes and
  integrated exactly (only used when c = 0);
* [t_lo, T]: composite Gauss-Legendre panels in log t;
* [T, inf): the large-argument expansion
  exp(-x) I_m(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(m) x^{-k}, multiplied across
  axes (and by the series of exp(-c/t)) and integrated term by term.

The kernel depends only on |n_1|, ..., |n_N|, so everything is computed on the
nonnegative orthant and reflected.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bessel import miller_table
from .lattice import DomainError

TAYLOR_DEGREE = 20
HANKEL_TERMS = 14
T_SMALL = 0.05
PANEL_WIDTH = 0.5
PANEL_NODES = 12
_NODE_CHUNK = 48


@dataclass(frozen=True)
class TimeQuadResult:
    values: np.ndarray        # full window, shape (2R+1,)*N
    error_estimate: float     # max abs change under panel halving (0 if not estimated)
    t_split: tuple            # (t_lo, T)


@lru_cache(maxsize=32)
def taylor_coefficients(mmax: int, degree: int = TAYLOR_DEGREE) -> np.ndarray:
    """a[m, p] with exp(-2t) I_m(2t) = sum_p a[m, p] t^p (zero for p < m)."""
    a = np.zeros((mmax + 1, degree + 1))
    for m in range(min(mmax, degree) + 1):
        for p in range(m, degree + 1):
            s = 0.0
            for k in range(0, (p - m) // 2 + 1):
                r = p - 2 * k - m
                s += (-2.0) ** r / (factorial(k) * factorial(k + m) * factorial(r))
            a[m, p] = s
    a.flags.writeable = False
    return a


@lru_cache(maxsize=32)
def hankel_coefficients(mmax: int, terms: int = HANKEL_TERMS) -> np.ndarray:
    """h[m, k] with exp(-2t) I_m(2t) ~ (4 pi t)^{-1/2} sum_k h[m, k] t^{-k}."""
    m = np.arange(mmax + 1, dtype=float)
    h = np.zeros((mmax + 1, terms + 1))
    h[:, 0] = 1.0
    for k in range(1, terms + 1):
        # a_k = a_{k-1} (4 m^2 - (2k-1)^2) / (8 k); x^{-k} = (2t)^{-k}; sign (-1)^k
        h[:, k] = h[:, k - 1] * (-(4.0 * m * m - (2 * k - 1) ** 2) / (8.0 * k * 2.0))
    h.flags.writeable = False
    return h


def _poly_product(axis_coef: np.ndarray, dim: int) -> np.ndarray:
    """Coefficients of prod_i P_{m_i}(u) for all (m_1..m_N) in the orthant.

    axis_coef has shape (M+1, D+1); the result has shape (M+1,)*N + (D+1,),
    truncated at degree D.
    """
    D = axis_coef.shape[1] - 1
    out = axis_coef
    for _ in range(dim - 1):
        # out[..., q] * axis[m, p-q]
        new = np.zeros(out.shape[:-1] + (axis_coef.shape[0], D + 1))
        for q in range(D + 1):
            new[..., :, q:] += out[..., q][..., None, None] * axis_coef[:, :D + 1 - q]
        out = new
    return out


def _reflect(orth: np.ndarray, dim: int) -> np.ndarray:
    R = orth.shape[0] - 1
    idx = np.abs(np.arange(-R, R + 1))
    return orth[np.ix_(*([idx] * dim))]


def _orthant_product_sum(g: np.ndarray, w: np.ndarray, dim: int) -> np.ndarray:
    """sum_j w_j prod_i g[m_i, j] for all orthant points; g has shape (M+1, nodes)."""
    if dim == 1:
        return g @ w
    if dim == 2:
        return (g * w) @ g.T
    M1 = g.shape[0]
    acc = g
    for _ in range(dim - 2):
        acc = (acc[:, None, :] * g[None, :, :]).reshape(-1, g.shape[1])
    return ((acc * w) @ g.T).reshape((M1,) * dim)


def _panels(lo: float, hi: float, width: float, nodes: int):
    """Nodes and weights of composite Gauss-Legendre panels on [lo, hi]."""
    n = max(1, int(np.ceil((hi - lo) / width)))
    x, w = leggauss(nodes)
    edges = np.linspace(lo, hi, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    tau = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return tau, wt


def split_points(radius: int, c: float = 0.0) -> tuple:
    mmax = radius
    T = 16.0 * (mmax * mmax + 1.0) + 16.0 * c
    t_lo = T_SMALL if c == 0 else min(T_SMALL, c / 45.0)
    return t_lo, T


# node tables up to this many entries are kept between calls
_CACHE_ENTRIES = 4_000_000


@lru_cache(maxsize=16)
def _node_table(radius: int, lo: float, hi: float, width: float, nodes: int):
    tau, wt = _panels(lo, hi, width, nodes)
    g = miller_table(radius, 2.0 * np.exp(tau))
    g.flags.writeable = False
    return tau, wt, g


def _node_chunks(radius, lo, hi, width, nodes):
    """(tau, weights, g) in chunks; small tables come from the cache in one piece."""
    tau, wt = _panels(lo, hi, width, nodes)
    if (radius + 1) * tau.size <= _CACHE_ENTRIES:
        yield _node_table(radius, lo, hi, width, nodes)
        return
    for s in range(0, tau.size, _NODE_CHUNK):
        ts = tau[s:s + _NODE_CHUNK]
        yield ts, wt[s:s + _NODE_CHUNK], miller_table(radius, 2.0 * np.exp(ts))


def _middle(radius: int, dim: int, beta: float, c: float, t_lo: float, T: float,
            width: float, nodes: int, complement: bool) -> np.ndarray:
    out = np.zeros((radius + 1,) * dim)
    for tau, wt, g in _node_chunks(radius, float(np.log(t_lo)), float(np.log(T)), width, nodes):
        w = wt * np.exp(beta * tau)
        if c:
            w = w * np.exp(-c / np.exp(tau))
        if complement:
            # 1 - G_t(0) only at the origin
            out.flat[0] += float(np.sum(w * (1.0 - g[0] ** dim)))
        else:
            out += _orthant_product_sum(g, w, dim)
    return out


def _small(radius: int, dim: int, beta: float, t_lo: float, complement: bool,
           origin_ok: bool) -> np.ndarray:
    P = TAYLOR_DEGREE
    mm = min(radius, P)
    a = taylor_coefficients(mm, P)
    B = _poly_product(a, dim)                       # shape (mm+1,)*N + (P+1,)
    p = np.arange(P + 1)
    out = np.zeros((radius + 1,) * dim)
    if complement:
        # 1 - G_t(0): the constant term cancels exactly
        b = -B[(0,) * dim].copy()
        b[0] = 0.0
        out.flat[0] = float(np.sum(b[1:] * t_lo ** (p[1:] + beta) / (p[1:] + beta)))
        return out
    expo = p + beta
    with np.errstate(divide="ignore", invalid="ignore"):
        mom = np.where(expo > 0, t_lo ** expo / np.where(expo > 0, expo, 1.0), np.inf)
    # entries with a nonzero coefficient at a nonpositive exponent diverge
    prod = np.zeros_like(B)
    np.multiply(B, mom, out=prod, where=B != 0)
    contrib = prod.sum(axis=-1)
    sl = tuple(slice(0, mm + 1) for _ in range(dim))
    out[sl] = contrib
    if not origin_ok:
        out.flat[0] = 0.0
    return out


def _large(radius: int, dim: int, beta: float, c: float, T: float, complement: bool) -> np.ndarray:
    H = HANKEL_TERMS
    h = hankel_coefficients(radius, H)
    if complement:
        D = _poly_product(h[:1], dim)[(0,) * dim]
    else:
        D = _poly_product(h, dim)
    if c:
        e = np.array([(-c) ** j / factorial(j) for j in range(H + 1)])
        D = _truncated_conv(D, e)
    p = np.arange(H + 1)
    expo = p + dim / 2.0 - beta
    if np.any(expo <= 0):
        raise DomainError("time integral diverges at infinity (requires beta < N/2)")
    mom = (4.0 * np.pi) ** (-dim / 2.0) * T ** (-expo) / expo
    vals = (D * mom).sum(axis=-1)
    if complement:
        out = np.zeros((radius + 1,) * dim)
        # int_T^inf t^{beta-1} dt = T^beta / (-beta) for beta < 0
        out.flat[0] = T ** beta / (-beta) - vals
        return out
    return vals


def _truncated_conv(D: np.ndarray, e: np.ndarray) -> np.ndarray:
    H = D.shape[-1] - 1
    out = np.zeros_like(D)
    for j in range(H + 1):
        out[..., j:] += e[j] * D[..., :H + 1 - j]
    return out


def heat_time_integral(radius: int, dim: int, beta: float, c: float = 0.0,
                       origin_ok: bool = True, estimate_error: bool = False,
                       t_split: tuple | None = None) -> TimeQuadResult:
    """J(n) = int_0^inf G_{t,N}(n) t^{beta-1} exp(-c/t) dt on the box of given radius.

    ``origin_ok=False`` marks the origin entry as excluded (set to 0) when the
    integral diverges there. With ``estimate_error`` the middle part is
    recomputed with panels of half width and the larger result is reported
    with the maximum absolute difference.
    """
    if dim < 1 or radius < 0:
        raise DomainError("requires N >= 1 and radius >= 0")
    if not beta < dim / 2.0:
        raise DomainError("time integral diverges at infinity (requires beta < N/2)")
    if c < 0:
        raise DomainError("requires c >= 0")
    t_lo, T = split_points(radius, c) if t_split is None else t_split
    small = _small(radius, dim, beta, t_lo, False, origin_ok) if c == 0 else 0.0
    large = _large(radius, dim, beta, c, T, False)
    mid = _middle(radius, dim, beta, c, t_lo, T, PANEL_WIDTH, PANEL_NODES, False)
    orth = small + mid + large
    err = 0.0
    if estimate_error:
        mid2 = _middle(radius, dim, beta, c, t_lo, T, PANEL_WIDTH / 2, PANEL_NODES, False)
        orth2 = small + mid2 + large
        d = np.abs(orth2 - orth)
        if not origin_ok:
            d.flat[0] = 0.0
        err = float(d.max())
        orth = orth2
    if not origin_ok:
        orth.flat[0] = 0.0
    return TimeQuadResult(_reflect(orth, dim), err, (t_lo, T))


def origin_complement_integral(dim: int, beta: float) -> float:
    """int_0^inf (1 - G_{t,N}(0)) t^{beta-1} dt for -1 < beta < 0."""
    if not -1.0 < beta < 0.0:
        raise DomainError("requires -1 < beta < 0")
    t_lo, T = split_points(0)
    small = _small(0, dim, beta, t_lo, True, True)
    mid = _middle(0, dim, beta, 0.0, t_lo, T, PANEL_WIDTH, PANEL_NODES, True)
    large = _large(0, dim, beta, 0.0, T, True)
    return float((small + mid + large).flat[0])

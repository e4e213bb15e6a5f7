"""Poisson semigroup P_t = exp(-t sqrt(-Delta)) by subordination to the heat semigroup.

The kernel is

    Q_t(n) = t / (2 sqrt(pi)) int_0^inf G_{v,N}(n) exp(-t^2/(4v)) v^{-3/2} dv,

evaluated with the log-time panel engine. The equivalent form
(1/sqrt(pi)) int_0^inf exp(-u) u^{-1/2} G_{t^2/(4u),N}(n) du is also available
through a fixed generalized Gauss-Laguerre rule, used as a cross-check where
the heat times it samples cover the kernel's support.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammainc, roots_genlaguerre

from .bessel import miller_table
from .fractional import _kernel_apply
from .heat import evolve, heat_kernel
from .lattice import DomainError, LatticeSequence, laplacian
from .timequad import HANKEL_TERMS, PANEL_NODES, PANEL_WIDTH, hankel_coefficients, \
    heat_time_integral, split_points

_SQRT_PI = float(np.sqrt(np.pi))


@dataclass(frozen=True, eq=False)
class SubordinationQuadrature:
    """Nodes and weights for int_0^inf exp(-u) u^{-1/2} phi(u) du."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return self.nodes.size


def subordination_quadrature(count: int = 64) -> SubordinationQuadrature:
    u, w = roots_genlaguerre(count, -0.5)
    return SubordinationQuadrature(u, w)


@dataclass(frozen=True, eq=False)
class PoissonKernel:
    t: float
    dim: int
    radius: int
    values: LatticeSequence
    tail_mass: float          # mass of Q_t outside the window
    error_estimate: float


def _check_t(t):
    if not t > 0:
        raise DomainError("requires t > 0")


@lru_cache(maxsize=32)
def _poisson_values(t: float, dim: int, radius: int, estimate_error: bool):
    r = heat_time_integral(radius, dim, -0.5, c=t * t / 4.0, estimate_error=estimate_error)
    pref = t / (2.0 * _SQRT_PI)
    return r.values * pref, r.error_estimate * pref


def poisson_kernel(t: float, dim: int, radius: int, estimate_error: bool = False) -> PoissonKernel:
    """Q_t on the box of the given radius with the mass outside it."""
    _check_t(t)
    v, err = _poisson_values(float(t), int(dim), int(radius), bool(estimate_error))
    return PoissonKernel(float(t), dim, radius, LatticeSequence(v, dim),
                         poisson_tail_mass(t, dim, radius), err)


def poisson_tail_mass(t: float, dim: int, radius: int) -> float:
    """Mass of Q_t outside the box, from the heat mass outside the box.

    t/(2 sqrt(pi)) int_0^inf (1 - S_R(v)^N) exp(-t^2/(4v)) v^{-3/2} dv with
    S_R(v) = sum_{|m| <= R} exp(-2v) I_m(2v), computed on the same panels plus
    a large-v expansion of S_R in powers of v^{-1/2}.
    """
    _check_t(t)
    c = t * t / 4.0
    R = int(radius)
    t_lo, T = split_points(R, c)
    x, w = leggauss(PANEL_NODES)
    n = max(1, int(np.ceil((np.log(T) - np.log(t_lo)) / PANEL_WIDTH)))
    edges = np.linspace(np.log(t_lo), np.log(T), n + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
    tau = (mid[:, None] + half[:, None] * x).ravel()
    wt = (half[:, None] * w).ravel()
    v = np.exp(tau)
    total = 0.0
    for s in range(0, v.size, 256):
        vs = v[s:s + 256]
        g = miller_table(R, 2.0 * vs)
        S = g[0] + 2.0 * g[1:].sum(axis=0)
        outside = -np.expm1(dim * np.log(np.minimum(S, 1.0)))
        total += float(np.sum(wt[s:s + 256] * vs ** -0.5 * np.exp(-c / vs) * outside))
    # large v: S_R(v) ~ (4 pi v)^{-1/2} sum_k H_k v^{-k}
    h = hankel_coefficients(R, HANKEL_TERMS)
    H = h[0] + 2.0 * h[1:].sum(axis=0)
    P = H.copy()
    for _ in range(dim - 1):
        P = np.convolve(P, H)[:HANKEL_TERMS + 1]
    # int_T^inf v^{-3/2} e^{-c/v} dv = c^{-1/2} Gamma(1/2) P(1/2, c/T)
    big = c ** -0.5 * _SQRT_PI * gammainc(0.5, c / T)
    e = np.array([(-c) ** j / factorial(j) for j in range(HANKEL_TERMS + 1)])
    corr = 0.0
    for p in range(HANKEL_TERMS + 1):
        for j in range(HANKEL_TERMS + 1 - p):
            ex = 0.5 + dim / 2.0 + p + j
            corr += P[p] * e[j] * T ** (-ex) / ex
    big -= (4.0 * np.pi) ** (-dim / 2.0) * corr
    return float(t / (2.0 * _SQRT_PI) * (total + big))


def poisson_kernel_laguerre(t: float, dim: int, radius: int, count: int = 64,
                            weight_exponent: float | None = None) -> LatticeSequence:
    """(1/sqrt(pi)) sum_j w_j G_{t^2/(4u_j)}(n) with a generalized Gauss-Laguerre rule.

    With ``weight_exponent`` a the rule integrates u^a e^{-u} against
    u^{-1/2-a} G_{t^2/(4u)}(n); a = (N-1)/2 absorbs the u^{N/2} behaviour near 0.
    """
    _check_t(t)
    a = -0.5 if weight_exponent is None else float(weight_exponent)
    u, w = roots_genlaguerre(count, a)
    out = np.zeros((2 * radius + 1,) * dim)
    for uj, wj in zip(u, w):
        G = heat_kernel(t * t / (4.0 * uj), dim, radius).values.values
        out += wj * uj ** (-0.5 - a) * G
    return LatticeSequence(out / _SQRT_PI, dim)


def poisson_evolve(f: LatticeSequence, t: float, radius: int | None = None) -> LatticeSequence:
    """P_t f on the box of given radius (default f's window); exact up to quadrature."""
    _check_t(t)
    R = f.radius if radius is None else radius
    Q = poisson_kernel(t, f.dim, f.radius + R)
    return LatticeSequence(_kernel_apply(f, Q.values.values, R), f.dim)


def laplace_residual(f: LatticeSequence, t: float, h: float = 1e-3,
                     radius: int | None = None) -> float:
    """max over the box of |d^2/dt^2 P_t f + Delta_N P_t f| with a centred t-difference."""
    _check_t(t - h)
    R = f.radius if radius is None else radius
    up, mid, dn = (poisson_evolve(f, s, R + 1) for s in (t + h, t, t - h))
    second = (up.values - 2.0 * mid.values + dn.values) / (h * h)
    lap = laplacian(mid).values
    res = LatticeSequence(second + lap, f.dim).crop(R)
    return float(np.abs(res.values).max())


def maximal_poisson(f: LatticeSequence, t_grid, radius: int | None = None) -> LatticeSequence:
    """max over the grid of |P_t f|; a lower bound for the supremum over t > 0."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise DomainError("empty time grid")
    R = f.radius if radius is None else radius
    out = np.zeros((2 * R + 1,) * f.dim)
    for ti in t:
        out = np.maximum(out, np.abs(poisson_evolve(f, ti, R).values))
    return LatticeSequence(out, f.dim)


__all__ = ["SubordinationQuadrature", "subordination_quadrature", "PoissonKernel",
           "poisson_kernel", "poisson_tail_mass", "poisson_kernel_laguerre", "poisson_evolve",
           "laplace_residual", "maximal_poisson", "evolve"]

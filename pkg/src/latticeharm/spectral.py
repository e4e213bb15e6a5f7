"""Trigonometric sums on a uniform torus grid and Fourier multipliers.

The transform of a finitely supported sequence is
``F(x) = sum_k f(k) exp(2 pi i <k, x>)`` sampled at the nodes
``x_j = j/M - 1/2``, j = 0..M-1 on each axis. The node x = 0 (index M/2) is
the DC node.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import gamma as gamma_fn

from .lattice import DomainError, LatticeSequence

# smallest default points per axis for multiplier application, by dimension
DEFAULT_MIN_POINTS = {1: 16384, 2: 512, 3: 128}

SYMBOL_KINDS = ("identity", "heat", "poisson", "riesz", "frac_neg", "frac_pos",
                "laplace_type", "imaginary_power", "poisson_derivative")


@dataclass(frozen=True)
class TorusGrid:
    dim: int
    points: int

    def __post_init__(self):
        if self.points < 2 or self.points % 2:
            raise DomainError("torus grid needs an even number of points per axis")

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    def axis_nodes(self) -> np.ndarray:
        return np.arange(self.points) / self.points - 0.5

    def nodes(self) -> list:
        x = self.axis_nodes()
        return list(np.meshgrid(*([x] * self.dim), indexing="ij", sparse=True))

    @property
    def dc_index(self) -> tuple:
        return (self.points // 2,) * self.dim

    def sin2(self) -> np.ndarray:
        """sum_k sin^2(pi x_k) at every node."""
        s = np.sin(np.pi * self.axis_nodes()) ** 2
        out = np.zeros(self.shape)
        for ax in range(self.dim):
            sh = [1] * self.dim
            sh[ax] = self.points
            out = out + s.reshape(sh)
        return out


def default_grid(dim: int, radius: int, points: int | None = None) -> TorusGrid:
    """Grid for applying multipliers to sequences of the given radius.

    Uses at least four times the window diameter and at least the
    per-dimension floor in DEFAULT_MIN_POINTS, rounded up to a power of two.
    """
    if points is None:
        need = max(4 * (2 * radius + 1), DEFAULT_MIN_POINTS.get(dim, 64))
        points = 1 << int(np.ceil(np.log2(need)))
    return TorusGrid(dim, int(points))


@dataclass(frozen=True, eq=False)
class TorusSymbol:
    grid: TorusGrid
    values: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    # conjugate-symmetric symbols map real sequences to real sequences
    hermitian: bool = True


def _sign_pattern(dim: int, radius: int) -> np.ndarray:
    c = np.arange(-radius, radius + 1)
    s = (-1.0) ** np.abs(c)
    out = s
    for _ in range(dim - 1):
        out = np.multiply.outer(out, s)
    return out


def dft(f: LatticeSequence, grid: TorusGrid) -> np.ndarray:
    """Samples of sum_k f(k) exp(2 pi i <k, x>) at the grid nodes."""
    M, R = grid.points, f.radius
    if grid.dim != f.dim:
        raise DomainError("grid dimension mismatch")
    if M < 2 * R + 1:
        raise DomainError("undersized grid: need M >= 2R + 1 points per axis")
    g = np.zeros(grid.shape, dtype=complex)
    idx = np.arange(-R, R + 1) % M
    g[np.ix_(*([idx] * f.dim))] = f.values * _sign_pattern(f.dim, R)
    # sum_k g(k) exp(+2 pi i k j / M) = M^N * ifftn(g)
    return np.fft.ifftn(g) * float(M) ** f.dim


def idft(F: np.ndarray, grid: TorusGrid, radius: int) -> LatticeSequence:
    """Lattice coefficients int F(x) exp(-2 pi i <n, x>) dx for |n_i| <= radius."""
    M = grid.points
    if 2 * radius + 1 > M:
        raise DomainError("undersized grid: need M >= 2R + 1 points per axis")
    c = np.fft.fftn(F) / float(M) ** grid.dim
    idx = np.arange(-radius, radius + 1) % M
    vals = c[np.ix_(*([idx] * grid.dim))] * _sign_pattern(grid.dim, radius)
    return LatticeSequence(vals, grid.dim)


def l2_norm_torus(F: np.ndarray) -> float:
    """(int |F|^2 dx)^{1/2} by the grid rule (exact for trigonometric polynomials)."""
    return float(np.sqrt(np.mean(np.abs(F) ** 2)))


def laplace_multiplier_values(lam: np.ndarray, a, epsrel: float = 1e-12) -> np.ndarray:
    """M(lam) = lam int_0^inf exp(-lam t) a(t) dt, with M(0) = 0.

    With s = lam t this is int_0^inf exp(-s) a(s/lam) ds, integrated in
    u = log s over [-45, 5] by scipy's vector quadrature, for all distinct
    nonzero lam at once.
    """
    lam = np.asarray(lam, dtype=float)
    uniq, inv = np.unique(lam.ravel(), return_inverse=True)
    out = np.zeros(uniq.size, dtype=complex)
    pos = uniq > 0
    lp = uniq[pos]
    if lp.size:
        def integrand(u):
            s = np.exp(u)
            return np.exp(-s) * s * np.asarray(a(s / lp), dtype=complex)
        re, _ = quad_vec(lambda u: integrand(u).real, -45.0, 5.0, epsrel=epsrel, epsabs=1e-15)
        im, _ = quad_vec(lambda u: integrand(u).imag, -45.0, 5.0, epsrel=epsrel, epsabs=1e-15)
        out[pos] = re + 1j * im
    return out[inv].reshape(lam.shape)


def imaginary_power_density(gamma_: float):
    """a(t) = t^{-i gamma} / Gamma(1 - i gamma), whose Laplace multiplier is x^{i gamma}."""
    g = gamma_fn(1.0 - 1j * gamma_)
    return lambda t: np.exp(-1j * gamma_ * np.log(t)) / g


def symbol(kind: str, grid: TorusGrid, **params) -> TorusSymbol:
    """Multiplier symbol sampled on the grid.

    kinds and parameters:
      heat(t)               exp(-4 t S)
      poisson(t)            exp(-2 t sqrt(S))
      poisson_derivative(t, k)  (-2 sqrt(S))^k exp(-2 t sqrt(S))
      riesz(axis)           -i exp(-pi i x_axis) sin(pi x_axis) / sqrt(S)
      frac_neg(sigma)       (4 S)^{-sigma}, 0 < sigma < N/2
      frac_pos(s)           (4 S)^{s}, 0 < s < 1
      laplace_type(a)       M(4 S), M(x) = x int exp(-x t) a(t) dt
      imaginary_power(gamma) (4 S)^{i gamma}
    where S = sum_k sin^2(pi x_k). Symbols singular or undefined at x = 0 are
    set to 0 there, so those operators act on mean-zero sequences only.
    """
    S = grid.sin2()
    dc = grid.dc_index
    N = grid.dim
    herm = True
    if kind == "identity":
        v = np.ones(grid.shape)
    elif kind == "heat":
        t = _pos(params, "t")
        v = np.exp(-4.0 * t * S)
    elif kind == "poisson":
        t = _pos(params, "t")
        v = np.exp(-2.0 * t * np.sqrt(S))
    elif kind == "poisson_derivative":
        t = _pos(params, "t")
        k = int(params["k"])
        r = np.sqrt(S)
        v = (-2.0 * r) ** k * np.exp(-2.0 * t * r)
    elif kind == "riesz":
        i = int(params["axis"])
        if not 1 <= i <= N:
            raise DomainError(f"axis must be in 1..{N}")
        xi = grid.nodes()[i - 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            v = -1j * np.exp(-1j * np.pi * xi) * np.sin(np.pi * xi) / np.sqrt(S)
        v = np.asarray(v, dtype=complex)
        v[dc] = 0.0
    elif kind == "frac_neg":
        sigma = float(params["sigma"])
        if not 0.0 < 2.0 * sigma < N:
            raise DomainError("requires 0 < 2 sigma < N")
        with np.errstate(divide="ignore"):
            v = (4.0 * S) ** (-sigma)
        v[dc] = 0.0
    elif kind == "frac_pos":
        s = float(params["s"])
        if not 0.0 < s < 1.0:
            raise DomainError("requires 0 < s < 1")
        v = (4.0 * S) ** s
    elif kind == "laplace_type":
        v = laplace_multiplier_values(4.0 * S, params["a"])
        v[dc] = 0.0
        herm = bool(params.get("hermitian", False))
    elif kind == "imaginary_power":
        g = float(params["gamma"])
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.exp(1j * g * np.log(4.0 * S))
        v[dc] = 0.0
        herm = False
    else:
        raise DomainError(f"unknown symbol kind {kind!r}")
    return TorusSymbol(grid, v, kind, {k: p for k, p in params.items() if k != "a"}, herm)


def _pos(params, name):
    v = float(params[name])
    if not v > 0:
        raise DomainError(f"requires {name} > 0")
    return v


def apply_multiplier(f: LatticeSequence, sym: TorusSymbol, radius: int | None = None,
                     keep_complex: bool = False) -> LatticeSequence:
    """idft(symbol * dft(f)) on f's window (or the given radius).

    For conjugate-symmetric symbols and real f the result is real: the
    imaginary residue is checked against 1e-10 and dropped.
    """
    grid = sym.grid
    if grid.dim != f.dim:
        raise DomainError("grid dimension mismatch")
    if grid.points < 2 * (2 * f.radius + 1):
        raise DomainError("undersized grid: need M >= 2 x window diameter")
    R = f.radius if radius is None else radius
    out = idft(sym.values * dft(f, grid), grid, R)
    if sym.hermitian and not f.is_complex and not keep_complex:
        v = out.values
        scale = max(1.0, float(np.abs(v).max()))
        resid = float(np.abs(v.imag).max()) if v.size else 0.0
        if resid > 1e-10 * scale:
            raise ArithmeticError(f"imaginary residue {resid:.3e} for a real symbol")
        return LatticeSequence(v.real, f.dim)
    return out


def mean_zero(f: LatticeSequence) -> LatticeSequence:
    """f minus its mean over the window (so that the lattice sum vanishes)."""
    return LatticeSequence(f.values - f.values.mean(), f.dim)

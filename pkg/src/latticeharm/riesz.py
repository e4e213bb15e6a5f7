"""Riesz transforms R_i = delta_i^+ (-Delta)^{-1/2} on Z^N (N >= 2) and the
discrete Hilbert transform on Z.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fractional import _kernel_apply
from .lattice import DomainError, LatticeSequence, holder_seminorm
from .spectral import apply_multiplier, default_grid, symbol
from .timequad import heat_time_integral

_SQRT_PI = float(np.sqrt(np.pi))


@dataclass(frozen=True, eq=False)
class RieszKernel:
    axis: int
    dim: int
    radius: int
    values: LatticeSequence
    error_estimate: float


def _check(dim: int, axis: int):
    if dim < 2:
        raise DomainError("Riesz transforms require N >= 2; use hilbert_apply for N = 1")
    if not 1 <= axis <= dim:
        raise DomainError(f"axis must be in 1..{dim}")


@lru_cache(maxsize=16)
def _half_integral(dim: int, radius: int, estimate_error: bool):
    r = heat_time_integral(radius, dim, 0.5, estimate_error=estimate_error)
    return r.values / _SQRT_PI, r.error_estimate / _SQRT_PI


def riesz_kernel(axis: int, dim: int, radius: int, estimate_error: bool = False) -> RieszKernel:
    """R_i(n) = 1/sqrt(pi) int_0^inf (G_t(n + e_i) - G_t(n)) t^{-1/2} dt.

    Built as the forward difference of the time integral of G_t t^{-1/2},
    which is even in every coordinate; this makes
    R_i(-k) = -R_i(k - e_i) hold exactly.
    """
    _check(dim, axis)
    J, err = _half_integral(int(dim), int(radius) + 1, bool(estimate_error))
    ax = axis - 1
    R = radius
    inner = tuple(slice(1, 2 * R + 2) for _ in range(dim))
    shifted = list(inner)
    shifted[ax] = slice(2, 2 * R + 3)
    vals = J[tuple(shifted)] - J[inner]
    return RieszKernel(axis, dim, R, LatticeSequence(vals, dim), 2.0 * err)


def apply_riesz(f: LatticeSequence, axis: int, path: str = "kernel", radius: int | None = None,
                grid_points: int | None = None, backward: bool = False) -> LatticeSequence:
    """R_i f (or the backward variant delta_i^- (-Delta)^{-1/2} f) on the given box.

    The backward variant satisfies Rbar_i f(n) = R_i f(n - e_i).
    """
    _check(f.dim, axis)
    R = f.radius if radius is None else radius
    if path == "kernel":
        if backward:
            e = np.zeros(f.dim, dtype=int)
            e[axis - 1] = -1
            fwd = apply_riesz(f, axis, "kernel", R + 1)
            return fwd.shift(e).crop(R)
        K = riesz_kernel(axis, f.dim, f.radius + R)
        return LatticeSequence(_kernel_apply(f, K.values.values, R), f.dim)
    if path == "spectral":
        _require_mean_zero(f)
        big = max(R, f.radius)
        fp = f.pad(big)

        def on(points):
            g = default_grid(f.dim, big, points)
            sym = symbol("riesz", g, axis=axis)
            if backward:
                # delta^- has symbol 1 - exp(2 pi i x_i): conjugate of the forward factor
                sym = type(sym)(g, np.conj(sym.values) * -1.0, "riesz_backward", sym.params, True)
            return apply_multiplier(fp, sym).crop(R), g.points

        if grid_points is not None:
            return on(grid_points)[0]
        coarse, M = on(None)
        fine, _ = on(2 * M)
        # leading periodization error of mean-zero data scales like M^{-N-1}
        w = 2.0 ** (f.dim + 1)
        return LatticeSequence((w * fine.values - coarse.values) / (w - 1.0), f.dim)
    raise DomainError("path must be 'kernel' or 'spectral'")


def _require_mean_zero(f: LatticeSequence, tol: float = 1e-12):
    scale = max(1.0, float(np.abs(f.values).sum()))
    if abs(f.total()) > tol * scale:
        raise DomainError("the spectral path requires mean-zero data (sum f = 0)")


def riesz_partial_sums(axis: int, dim: int, radii) -> np.ndarray:
    """S_M = sum over the l1 ball |k| <= M of R_i(k), for each M in ``radii``."""
    Rmax = int(max(radii))
    K = riesz_kernel(axis, dim, Rmax)
    l1 = K.values.window.l1_length()
    v = K.values.values
    return np.array([float(np.sum(v[l1 <= M])) for M in radii])


def hilbert_apply(f: LatticeSequence, radius: int | None = None) -> LatticeSequence:
    """H f(n) = sum_k f(k) / (n - k + 1/2) on the box of given radius (N = 1)."""
    if f.dim != 1:
        raise DomainError("the discrete Hilbert transform is defined for N = 1")
    R = f.radius if radius is None else radius
    m = np.arange(-(f.radius + R), f.radius + R + 1)
    kern = 1.0 / (m + 0.5)
    return LatticeSequence(_kernel_apply(f, kern, R), 1)


def riesz_holder_ratio(f: LatticeSequence, alpha: float, axis: int = 1,
                       interior: int | None = None) -> float:
    """[R_i f]_{C^{0,alpha}} / [f]_{C^{0,alpha}} over the box of radius ``interior``.

    A sequence constant on its window is treated as a constant and gives 0.
    """
    if not 0.0 < alpha < 0.5:
        raise DomainError("requires 0 < alpha < 1/2")
    _check(f.dim, axis)
    v = f.values
    if np.all(v == v.flat[0]):
        return 0.0
    R = f.radius if interior is None else interior
    out = apply_riesz(f, axis, radius=R)
    return holder_seminorm(out, alpha) / holder_seminorm(f.crop(R), alpha)

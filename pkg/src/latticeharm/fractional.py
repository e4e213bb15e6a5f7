"""Negative and positive powers of the discrete Laplacian.

Kernels are time integrals of the heat kernel,

    K_sigma(n) = 1/Gamma(sigma) int_0^inf G_{t,N}(n) t^{sigma-1} dt,
    Ks_s(n)    = 1/|Gamma(-s)| int_0^inf G_{t,N}(n) t^{-s-1} dt   (n != 0),

and (-Delta)^s f(n) = sum_{k != n} Ks_s(n-k) (f(n) - f(k)).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn, rgamma

from .lattice import (DomainError, LatticeSequence, Weight, convolve_arrays,
                      holder_seminorm, laplacian, lp_norm)
from .spectral import apply_multiplier, default_grid, symbol
from .timequad import heat_time_integral, origin_complement_integral


@dataclass(frozen=True, eq=False)
class FracKernel:
    """Kernel of a negative ("neg") or positive ("pos") power on a box window."""

    sign: str
    order: float
    dim: int
    radius: int
    values: LatticeSequence
    error_estimate: float
    diagonal: float = 0.0     # for "pos": the coefficient of f(n), sum of the kernel


def sigma_weight(sigma: float, dim: int, radius: int) -> Weight:
    """w_sigma(n) = (1 + |n|)^{2 sigma - N}; negative sigma gives the l_{-s} weight."""
    return Weight.power(dim, radius, 2.0 * sigma - dim)


def check_sigma(sigma: float, dim: int):
    if not 0.0 < 2.0 * sigma < dim:
        raise DomainError(f"requires 0 < 2 sigma < N (got sigma={sigma}, N={dim})")


def check_s(s: float):
    if not 0.0 < s < 1.0:
        raise DomainError(f"requires 0 < s < 1 (got s={s})")


def inv_abs_gamma_neg(s: float) -> float:
    """1/|Gamma(-s)| = s / Gamma(1 - s) for 0 < s < 1."""
    return s * float(rgamma(1.0 - s))


@lru_cache(maxsize=32)
def _neg_kernel(sigma: float, dim: int, radius: int, estimate_error: bool):
    r = heat_time_integral(radius, dim, sigma, estimate_error=estimate_error)
    g = float(rgamma(sigma))
    return r.values * g, r.error_estimate * g


@lru_cache(maxsize=32)
def _pos_kernel(s: float, dim: int, radius: int, estimate_error: bool):
    r = heat_time_integral(radius, dim, -s, origin_ok=False, estimate_error=estimate_error)
    c = inv_abs_gamma_neg(s)
    v = r.values * c
    v[(radius,) * dim] = 0.0
    return v, r.error_estimate * c


def frac_integral_kernel(sigma: float, dim: int, radius: int,
                         estimate_error: bool = False) -> FracKernel:
    """K_sigma on the box of the given radius (0 < 2 sigma < N)."""
    check_sigma(sigma, dim)
    v, err = _neg_kernel(float(sigma), int(dim), int(radius), bool(estimate_error))
    return FracKernel("neg", float(sigma), dim, radius, LatticeSequence(v, dim), err)


@lru_cache(maxsize=32)
def frac_power_diagonal(s: float, dim: int) -> float:
    """c_s = 1/|Gamma(-s)| int_0^inf (1 - G_{t,N}(0)) t^{-s-1} dt = sum_{n != 0} Ks_s(n)."""
    check_s(s)
    return inv_abs_gamma_neg(s) * origin_complement_integral(dim, -s)


def frac_power_kernel(s: float, dim: int, radius: int,
                      estimate_error: bool = False) -> FracKernel:
    """Ks_s on the box of the given radius; the origin value is exactly 0."""
    check_s(s)
    v, err = _pos_kernel(float(s), int(dim), int(radius), bool(estimate_error))
    return FracKernel("pos", float(s), dim, radius, LatticeSequence(v, dim), err,
                      frac_power_diagonal(float(s), int(dim)))


def _kernel_apply(f: LatticeSequence, kern: np.ndarray, radius: int) -> np.ndarray:
    """sum_k kern(n - k) f(k) for |n_i| <= radius; kern must have radius R_f + radius."""
    full = convolve_arrays(f.values, kern)
    # full has radius R_f + R_kern; keep the central box of the requested radius
    c = (full.shape[0] - 1) // 2
    sl = tuple(slice(c - radius, c + radius + 1) for _ in range(f.dim))
    return full[sl]


def apply_frac_integral(f: LatticeSequence, sigma: float, path: str = "kernel",
                        radius: int | None = None, grid_points: int | None = None) -> LatticeSequence:
    """(-Delta)^{-sigma} f on the box of given radius (default: f's window).

    The kernel path is exact on the output box (the kernel is built out to
    R_f + radius). The spectral path multiplies by (4 sum sin^2)^{-sigma} and
    requires sum f = 0; without ``grid_points`` it extrapolates over two torus
    sizes to cancel the leading periodization error.
    """
    check_sigma(sigma, f.dim)
    R = f.radius if radius is None else radius
    if path == "kernel":
        K = frac_integral_kernel(sigma, f.dim, f.radius + R)
        return LatticeSequence(_kernel_apply(f, K.values.values, R), f.dim)
    if path == "spectral":
        _require_mean_zero(f)
        Rg = max(R, f.radius)
        fp = f.pad(Rg)

        def on(points):
            g = default_grid(f.dim, Rg, points)
            return apply_multiplier(fp, symbol("frac_neg", g, sigma=sigma)).crop(R), g.points

        if grid_points is not None:
            return on(grid_points)[0]
        coarse, M = on(None)
        fine, _ = on(2 * M)
        # periodization error of mean-zero data scales like M^{2 sigma - N - 2};
        # one Richardson step over M and 2M removes the leading term
        w = 2.0 ** (f.dim + 2 - 2.0 * sigma)
        return LatticeSequence((w * fine.values - coarse.values) / (w - 1.0), f.dim)
    raise DomainError("path must be 'kernel' or 'spectral'")


def apply_frac_power(f: LatticeSequence, s: float, path: str = "kernel",
                     radius: int | None = None, grid_points: int | None = None) -> LatticeSequence:
    """(-Delta)^s f = sum_{k != n} Ks_s(n - k) (f(n) - f(k)) on the given box."""
    check_s(s)
    R = f.radius if radius is None else radius
    if path == "kernel":
        K = frac_power_kernel(s, f.dim, f.radius + R)
        conv = _kernel_apply(f, K.values.values, R)
        fR = f.pad(max(R, f.radius)).crop(R).values
        return LatticeSequence(K.diagonal * fR - conv, f.dim)
    if path == "spectral":
        g = default_grid(f.dim, max(R, f.radius), grid_points)
        return apply_multiplier(f.pad(max(R, f.radius)), symbol("frac_pos", g, s=s)).crop(R)
    raise DomainError("path must be 'kernel' or 'spectral'")


def _require_mean_zero(f: LatticeSequence, tol: float = 1e-12):
    scale = max(1.0, float(np.abs(f.values).sum()))
    if abs(f.total()) > tol * scale:
        raise DomainError("the spectral path requires mean-zero data (sum f = 0)")


def frac_limits_check(f: LatticeSequence, s_values, end: str = "zero") -> dict:
    """Deviation of (-Delta)^s f from f (end="zero") or from -Delta f (end="one").

    Returns the sup-norm deviations along ``s_values`` and whether they
    strictly decrease along the given order.
    """
    target = f if end == "zero" else -laplacian(f.pad(f.radius + 1))
    R = target.radius
    devs = []
    for s in s_values:
        v = apply_frac_power(f, float(s), radius=R)
        devs.append(lp_norm(v - target, np.inf))
    devs = np.array(devs)
    return {"s": [float(s) for s in s_values], "deviation": devs.tolist(),
            "monotone": bool(np.all(np.diff(devs) < 0))}


def frac_power_at(f: LatticeSequence, n0, s: float) -> float:
    """(-Delta)^s f(n0) by the pointwise formula, for n0 inside f's window."""
    check_s(s)
    K = frac_power_kernel(s, f.dim, 2 * f.radius)
    n0 = np.asarray(n0, dtype=int)
    R = f.radius
    # Ks(n0 - k) for k in f's window: slice of the kernel centred at n0
    c = 2 * R
    sl = tuple(slice(c + ni - R, c + ni + R + 1) for ni in n0)
    kern = K.values.values[sl][(slice(None, None, -1),) * f.dim]
    fn0 = f[n0]
    # k outside the window has f(k) = 0 and contributes Ks(n0 - k) f(n0)
    outside = K.diagonal - float(kern.sum())
    return float(np.sum(kern * (fn0 - f.values)) + fn0 * outside)


def maximum_principle_check(f: LatticeSequence, n0, s: float) -> float:
    """(-Delta)^s f(n0) for f >= 0 with f(n0) = 0; the value is always <= 0."""
    if np.any(f.values < 0):
        raise DomainError("maximum principle requires f >= 0")
    if f[n0] != 0:
        raise DomainError("maximum principle requires f(n0) = 0")
    return frac_power_at(f, n0, s)


def comparison_check(f: LatticeSequence, g: LatticeSequence, n0, s: float) -> float:
    """(-Delta)^s f(n0) - (-Delta)^s g(n0) for f >= g with f(n0) = g(n0); always <= 0."""
    d = f - g
    if np.any(d.values < 0):
        raise DomainError("comparison principle requires f >= g")
    if d[n0] != 0:
        raise DomainError("comparison principle requires f(n0) = g(n0)")
    return frac_power_at(d, n0, s)


def hls_exponents_valid(dim: int, sigma: float, p: float, q: float) -> bool:
    """0 < 2 sigma < N, 1 < q < p < inf and 1/p <= 1/q - 2 sigma / N."""
    return (0 < 2 * sigma < dim and 1 < q < p < np.inf
            and 1.0 / p <= 1.0 / q - 2.0 * sigma / dim + 1e-15)


def hls_ratio(f: LatticeSequence, sigma: float, p: float, q: float, radius: int | None = None) -> float:
    """||(-Delta)^{-sigma} f||_p / ||f||_q on the box of given radius."""
    if not hls_exponents_valid(f.dim, sigma, p, q):
        raise DomainError("requires 1 < q < p < inf and 1/p <= 1/q - 2 sigma/N")
    out = apply_frac_integral(f, sigma, radius=radius)
    return lp_norm(out, p) / lp_norm(f, q)


def schauder_ratio(f: LatticeSequence, sigma: float, mode: str = "c", alpha: float = 0.0,
                   interior: int | None = None) -> float:
    """Hoelder seminorm of (-Delta)^{-sigma} f over the matching input size.

    mode "c": [(-Delta)^{-sigma} f]_{C^{0, 2 sigma}} / ||f||_inf, 0 < sigma < 1/2.
    mode "a": [(-Delta)^{-sigma} f]_{C^{0, 2 sigma + alpha}} / [f]_{C^{0, alpha}},
              alpha + 2 sigma < 1.
    Seminorms are taken over the box of radius ``interior`` (default R_f).
    A sequence constant on its window is treated as a constant, whose
    transform has zero difference seminorm; the ratio is then 0.
    """
    check_sigma(sigma, f.dim)
    v = f.values
    if np.all(v == v.flat[0]):
        return 0.0
    R = f.radius if interior is None else interior
    out = apply_frac_integral(f, sigma, radius=R)
    if mode == "c":
        if not 0 < sigma < 0.5:
            raise DomainError("mode c requires 0 < sigma < 1/2")
        return holder_seminorm(out, 2 * sigma) / lp_norm(f, np.inf)
    if mode == "a":
        if not (0 < alpha and alpha + 2 * sigma < 1):
            raise DomainError("mode a requires alpha > 0 and alpha + 2 sigma < 1")
        return holder_seminorm(out, 2 * sigma + alpha) / holder_seminorm(f.crop(R), alpha)
    raise DomainError("mode must be 'a' or 'c'")


def cancellation_partial_sums(sigma: float, dim: int, n, radii) -> np.ndarray:
    """sum_{|k_i| <= R} (K_sigma(n - k) - K_sigma(k)) for each R in ``radii``."""
    check_sigma(sigma, dim)
    n = np.asarray(n, dtype=int)
    Rmax = int(max(radii))
    shift = int(np.abs(n).max())
    K = frac_integral_kernel(sigma, dim, Rmax + shift).values
    out = []
    for R in radii:
        box = LatticeSequence.zeros(dim, R)
        coords = box.window.coords()
        a = K.values[tuple(np.asarray(n[i] - coords[i] + Rmax + shift) for i in range(dim))]
        b = K.values[tuple(np.asarray(coords[i] + Rmax + shift) for i in range(dim))]
        out.append(float(np.sum(np.broadcast_to(a, box.window.shape))
                         - np.sum(np.broadcast_to(b, box.window.shape))))
    return np.array(out)


def gamma_ratio_exact_1d(kind: str, order: float, n: int) -> float:
    """Closed forms in N = 1 via the Gamma function (double precision).

    kind "neg": K_sigma(n) = 4^{-sigma} Gamma(1/2 - sigma) Gamma(|n| + sigma)
                             / (sqrt(pi) Gamma(sigma) Gamma(|n| + 1 - sigma))
    kind "pos": Ks_s(n)    = 4^{s} Gamma(1/2 + s) Gamma(|n| - s)
                             / (sqrt(pi) |Gamma(-s)| Gamma(|n| + 1 + s)),  n != 0
    """
    from scipy.special import gammaln
    n = abs(int(n))
    if kind == "neg":
        s = order
        return float(np.exp(-s * np.log(4.0) + gammaln(0.5 - s) + gammaln(n + s)
                            - 0.5 * np.log(np.pi) - gammaln(s) - gammaln(n + 1 - s)))
    s = order
    return float(4.0 ** s * gamma_fn(0.5 + s) * np.exp(gammaln(n - s) - gammaln(n + 1 + s))
                 / np.sqrt(np.pi) * inv_abs_gamma_neg(s))

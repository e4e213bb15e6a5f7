"""Heat kernel on Z^N, the heat semigroup, decay-law fits and envelopes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bessel import miller_table, ratio_bound_f, scaled_bessel_i
from .lattice import DomainError, LatticeSequence, convolve, lp_norm

DEFAULT_TAIL_TOL = 1e-10
MAX_RADIUS = 4096


@dataclass(frozen=True, eq=False)
class HeatKernel:
    """G_{t,N} on the box of radius ``radius`` plus a bound on the mass outside it.

    ``axis`` holds the one-dimensional factor exp(-2t) I_n(2t), |n| <= radius.
    """

    t: float
    dim: int
    radius: int
    values: LatticeSequence
    tail_mass_bound: float
    axis: np.ndarray


def _tail_1d(g_next: np.ndarray, R: np.ndarray, x: float) -> np.ndarray:
    """Bound on sum_{|k| > R} exp(-x) I_k(x) given the value at order R + 1.

    I_{k+1}/I_k < f_{k+1/2}(x) <= f_{R+3/2}(x) for k >= R + 1, so the tail is
    dominated by a geometric series.
    """
    rho = ratio_bound_f(R + 1.5, x)
    return 2.0 * g_next / (1.0 - rho)


def heat_axis(t: float, radius: int) -> np.ndarray:
    """exp(-2t) I_k(2t) for k = -radius..radius."""
    g = miller_table(radius, 2.0 * t)
    return np.concatenate([g[:0:-1], g])


def auto_radius(t: float, dim: int = 1, tol: float = DEFAULT_TAIL_TOL) -> tuple:
    """Smallest R whose certified N-dimensional tail mass is below ``tol``.

    Returns (R, tail_bound).
    """
    if not t > 0:
        raise DomainError("requires t > 0")
    x = 2.0 * t
    guess = int(np.ceil(x + 15.0 * np.sqrt(x) + 40))
    while True:
        kmax = min(guess, MAX_RADIUS + 1)
        g = miller_table(kmax, x)
        R = np.arange(kmax)
        tail = dim * _tail_1d(g[1:], R, x)
        ok = np.nonzero(tail <= tol)[0]
        if ok.size:
            return int(R[ok[0]]), float(tail[ok[0]])
        if kmax > MAX_RADIUS:
            raise DomainError(f"heat kernel tail tolerance {tol} unreachable within radius {MAX_RADIUS}")
        guess *= 2


def heat_kernel(t: float, dim: int, radius: int | str = "auto",
                tol: float = DEFAULT_TAIL_TOL) -> HeatKernel:
    """G_{t,N}(n) = prod_k exp(-2t) I_{n_k}(2t) on a box window.

    Parameters
    ----------
    t : float
        Time, t > 0.
    dim : int
        Lattice dimension N.
    radius : int or "auto"
        Box radius. "auto" picks the smallest radius whose certified tail mass
        is below ``tol``.
    """
    if not t > 0:
        raise DomainError("requires t > 0")
    if dim < 1:
        raise DomainError("requires N >= 1")
    if radius == "auto":
        R, _ = auto_radius(t, dim, tol)
    else:
        R = int(radius)
        if R < 0:
            raise DomainError("requires radius >= 0")
    g = miller_table(R + 1, 2.0 * t)
    tail1 = float(_tail_1d(g[R + 1], np.array(R), 2.0 * t))
    axis = np.concatenate([g[R:0:-1], g[:R + 1]])
    vals = axis
    for _ in range(dim - 1):
        vals = np.multiply.outer(vals, axis)
    tail = float(min(1.0, 1.0 - (1.0 - min(tail1, 1.0)) ** dim + dim * 1e-16))
    return HeatKernel(float(t), dim, R, LatticeSequence(vals, dim), tail, axis)


def evolve(f: LatticeSequence, t: float, radius: int | None = None,
           tol: float = DEFAULT_TAIL_TOL) -> LatticeSequence:
    """W_t f = G_{t,N} * f on the full output window (or cropped to ``radius``)."""
    if t < 0:
        raise DomainError("requires t >= 0")
    if t == 0:
        return f if radius is None else f.crop(radius)
    G = heat_kernel(t, f.dim, "auto", tol)
    return convolve(f, G.values, crop=radius)


def kernel_norm(t: float, dim: int, r: float) -> float:
    """||G_{t,N}||_r using the product structure ||G_N||_r = ||G_1||_r^N."""
    r = float(r)
    if r < 1:
        raise DomainError("requires r >= 1")
    R, _ = auto_radius(t, 1, 1e-16)
    g = miller_table(R, 2.0 * t)
    if np.isinf(r):
        return float(g[0] ** dim)
    s = g[0] ** r + 2.0 * np.sum(g[1:] ** r)
    return float(s ** (dim / r))


def geometric_grid(tmin: float, tmax: float, ratio: float = 2.0) -> np.ndarray:
    """tmin, tmin*ratio, ... up to tmax (inclusive within rounding)."""
    if not (tmin > 0 and tmax > tmin and ratio > 1):
        raise DomainError("degenerate grid: need 0 < tmin < tmax and ratio > 1")
    n = int(np.floor(np.log(tmax / tmin) / np.log(ratio) + 1e-9)) + 1
    return tmin * ratio ** np.arange(n)


def loglog_slope(t, values) -> float:
    """Ordinary least-squares slope of log(values) against log(t)."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 2 or np.any(t <= 0) or np.any(v <= 0):
        raise DomainError("slope fit needs >= 2 positive points")
    return float(np.polyfit(np.log(t), np.log(v), 1)[0])


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.size < 4:
        raise DomainError("degenerate grid: need at least 4 times")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise DomainError("degenerate grid: times must be positive and increasing")
    return t


def decay_slope_fit(dim: int, r: float, t_grid) -> tuple:
    """Fit of log ||G_{t,N}||_r against log t; returns (slope, norms)."""
    t = _check_grid(t_grid)
    norms = np.array([kernel_norm(ti, dim, r) for ti in t])
    if np.all(np.abs(norms - norms[0]) <= 1e-12 * norms[0]):
        return 0.0, norms
    return loglog_slope(t, norms), norms


def predicted_decay_slope(dim: int, r: float) -> float:
    """-N/2 (1 - 1/r)."""
    return -dim / 2.0 * (1.0 - 1.0 / float(r))


def mass_residual(f: LatticeSequence, t: float, p: float) -> float:
    """||W_t f - (sum f) G_{t,N}||_p."""
    mass = f.total()
    if mass == 0:
        raise DomainError("requires sum f != 0 (mass-zero data decays faster)")
    G = heat_kernel(t, f.dim)
    Wf = convolve(f, G.values)
    diff = Wf - G.values * mass
    return lp_norm(diff, p)


def predicted_mass_slope(dim: int, p: float, q: float) -> float:
    """-1/2 - N/2 (1/q - 1/p)."""
    return -0.5 - dim / 2.0 * (1.0 / float(q) - 1.0 / float(p))


def check_mass_exponents(dim: int, p: float, q: float):
    q, p = float(q), float(p)
    qmax = np.inf if dim == 1 else dim / (dim - 1.0)
    if not (1.0 <= q < qmax and q <= p):
        raise DomainError("requires 1 <= q < N/(N-1) and q <= p")


def mass_slope_fit(f: LatticeSequence, p: float, q: float, t_grid) -> tuple:
    """Fit of the mass residual against t; returns (slope, residuals)."""
    check_mass_exponents(f.dim, p, q)
    if f.total() == 0:
        raise DomainError("requires sum f != 0; slope fit refused for mass-zero data")
    t = _check_grid(t_grid)
    res = np.array([mass_residual(f, ti, p) for ti in t])
    return loglog_slope(t, res), res


ENVELOPES = ("H", "H2", "H3")


def smoothness_envelope(kind: str, t, z, dim: int):
    """Envelopes built from G_{t,1}(z)^N at real order z.

    kind "H"  : (z/t) G^N
    kind "H2" : (1/t + z^2/t^2) G^N
    kind "H3" : (z/t^2 + z^3/t^3) G^N
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(t <= 0) or np.any(z <= 0):
        raise DomainError("requires t > 0 and z > 0")
    g = np.asarray(scaled_bessel_i(z, 2.0 * t)) ** dim
    if kind == "H":
        out = z / t * g
    elif kind == "H2":
        out = (1.0 / t + z ** 2 / t ** 2) * g
    elif kind == "H3":
        out = (z / t ** 2 + z ** 3 / t ** 3) * g
    else:
        raise DomainError(f"unknown envelope {kind!r}; expected one of {ENVELOPES}")
    return float(out) if out.ndim == 0 else out


def envelope_l1_norm(kind: str, t: float, dim: int, K: float) -> float:
    """sum over n != 0 of envelope(kind, t, |n|/K) on a window holding the mass."""
    R, _ = auto_radius(t, 1, 1e-14)
    R = int(np.ceil(K * (R + 1)))
    # count lattice points by l1 length: number with |n| = m in Z^N
    m = np.arange(1, dim * R + 1)
    counts = _l1_shell_counts(dim, m)
    vals = smoothness_envelope(kind, t, m / K, dim)
    return float(np.sum(counts * vals))


def _l1_shell_counts(dim: int, m: np.ndarray) -> np.ndarray:
    """Number of points of Z^N with l1 length m (exact integer formula)."""
    from scipy.special import comb
    m = np.asarray(m)
    out = np.zeros(m.shape)
    for k in range(1, dim + 1):
        out += 2.0 ** k * comb(dim, k) * comb(m - 1, k - 1)
    return out


def geometric_time_grid(tmin: float, tmax: float, per_decade: int = 32) -> np.ndarray:
    n = int(round(np.log10(tmax / tmin) * per_decade)) + 1
    return np.geomspace(tmin, tmax, n)


def maximal_heat(f: LatticeSequence, t_grid, radius: int | None = None) -> LatticeSequence:
    """max over the grid of |W_t f|; a lower bound for the supremum over all t > 0."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise DomainError("empty time grid")
    R = f.radius if radius is None else radius
    out = np.zeros((2 * R + 1,) * f.dim)
    for ti in t:
        out = np.maximum(out, np.abs(evolve(f, ti, radius=R).values))
    return LatticeSequence(out, f.dim)

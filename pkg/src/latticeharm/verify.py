"""Calibrate-then-verify runner for inequalities with unspecified constants.

Every registered inequality is reduced to a ratio r(sample) that must stay
below a constant C. Constants that are explicit are fixed; the others are
calibrated as safety x max ratio on a seeded grid and frozen in a JSON
fixture. Verification draws a fresh grid from a different seed and reports the
worst margin C - r with its location.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .bessel import inequality_ratio, scaled_bessel_i
from .fractional import frac_integral_kernel, frac_power_at, schauder_ratio
from .heat import maximal_heat, geometric_time_grid, smoothness_envelope
from .lattice import DomainError, LatticeSequence
from .riesz import riesz_holder_ratio, riesz_kernel
from .squarefn import (TimeGridQuadrature, gk_lp_ratio, multiplier_domination_ratio,
                       poisson_heat_domination_ratio)

FIXTURE_PATH = Path(__file__).with_name("data") / "calibration.json"
FIXTURE_VERSION = 1
CALIBRATION_SEED = 1
DEFAULT_SAFETY = 1.25
CALIBRATION_SCALE = 4.0
# relative slack for constant-free inequalities, which can hold with equality in double precision
STRICT_RTOL = 1e-14
BOUND_I_ALPHAS = (-0.5, -0.25, 0.0, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class Inequality:
    ident: str
    suite: str
    domain: str
    sampler: Callable          # (rng, size, params) -> dict of arrays / lists
    ratio: Callable            # (sample, params) -> ratios
    locate: Callable           # (sample, index) -> dict
    explicit: float | None = None   # known constant, or None when calibrated
    atol: float = 0.0
    default_size: int = 1000
    variants: tuple = ({},)
    K: Callable | None = None  # params -> K for envelope-type bounds


@dataclass(frozen=True)
class GridSpec:
    seed: int = CALIBRATION_SEED
    size: int | None = None


@dataclass(frozen=True)
class CalibratedConstant:
    ident: str
    params: dict
    domain: str
    grid: dict
    C: float
    safety: float
    max_ratio: float
    K: float | None = None
    seed: int = CALIBRATION_SEED
    tool_version: str = __version__

    def __post_init__(self):
        if not self.C > 0:
            raise DomainError("calibrated constant must be positive")
        if self.safety < 1.1:
            raise DomainError("safety factor must be at least 1.1")

    @property
    def key(self) -> str:
        return fixture_key(self.ident, self.params)


@dataclass
class ItemResult:
    key: str
    passed: bool
    worst_margin: float
    worst_ratio: float
    C: float
    points: int
    location: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    seed: int
    items: list

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "passed": self.passed,
                "items": [asdict(i) for i in self.items]}

    def table(self) -> str:
        rows = [f"{'inequality':34s} {'result':6s} {'points':>7s} {'C':>12s} {'worst ratio':>12s} {'margin':>12s}"]
        for i in self.items:
            rows.append(f"{i.key:34s} {'pass' if i.passed else 'FAIL':6s} {i.points:7d} "
                        f"{i.C:12.6g} {i.worst_ratio:12.6g} {i.worst_margin:12.4e}")
        return "\n".join(rows)


def fixture_key(ident: str, params: dict) -> str:
    if not params:
        return ident
    inner = ",".join(f"{k}={params[k]}" for k in sorted(params))
    return f"{ident}[{inner}]"


# ------------------------------------------------------------------ samplers

def _x_grid(rng, size, xmax=50.0):
    # log-uniform over (1e-3, xmax] so both small and large arguments are exercised
    return np.exp(rng.uniform(np.log(1e-3), np.log(xmax), size))


def _bessel_sampler(amin, amax):
    def sample(rng, size, params):
        a = rng.uniform(amin, amax, size)
        return {"a": a, "x": _x_grid(rng, size)}
    return sample


def _loc_ax(sample, i):
    return {k: float(v[i]) for k, v in sample.items()}


def _amgm_sample(rng, size, params):
    n = rng.integers(2, 5, size)
    orders = rng.uniform(-1.0, 20.0, (size, 4))
    # repeat the first order into unused slots so the mean is over n orders
    mask = np.arange(4)[None, :] >= n[:, None]
    # the mean of the chosen n orders is kept by padding with that mean
    mean = np.array([orders[i, :n[i]].mean() for i in range(size)])
    orders = np.where(mask, mean[:, None], orders)
    return {"orders": orders, "n": n, "x": _x_grid(rng, size)}


def _amgm_ratio(s, p):
    # padding with the mean leaves the n-order chain unchanged:
    # the extra factors I_m appear identically in all three members
    return inequality_ratio("am-gm", None, s["x"], orders=s["orders"])


def _amgm_loc(s, i):
    n = int(s["n"][i])
    return {"orders": [float(v) for v in s["orders"][i, :n]], "x": float(s["x"][i])}


def _bound_sample(rng, size, params):
    al = params["alpha"]
    return {"a": al + rng.uniform(1e-3, 20.0, size), "x": _x_grid(rng, size)}


def _sum_l1_sample(rng, size, params):
    return {"t": np.exp(rng.uniform(np.log(1e-3), np.log(1e3), min(size, 200)))}


def _sum_l1_ratio(s, p):
    out = []
    for t in s["t"]:
        K = int(2 * t + 40 + 12 * np.sqrt(2 * t))
        g = np.asarray(scaled_bessel_i(np.arange(K + 1), np.full(K + 1, t)))
        S = g[0] + 2.0 * g[1:].sum()
        out.append(max(S, 1.0 / S))
    return np.array(out)


# heat-kernel values at arbitrary lattice points

def _g_point(n: np.ndarray, t: np.ndarray) -> np.ndarray:
    """G_{t,N}(n) for rows n of shape (size, N) and matching t."""
    out = np.ones(n.shape[0])
    for i in range(n.shape[1]):
        out = out * np.asarray(scaled_bessel_i(np.abs(n[:, i]).astype(float), 2.0 * t))
    return out


def _heat_points(rng, size, params, rmax=40):
    """t log-uniform on [1e-2, 1e3]; n with l_inf size drawn log-uniformly up to rmax."""
    N = params["dim"]
    t = np.exp(rng.uniform(np.log(1e-2), np.log(1e3), size))
    r = np.floor(np.exp(rng.uniform(0.0, np.log(rmax + 1.0), size))).astype(int)
    n = np.floor(rng.uniform(-1.0, 1.0, (size, N)) * (r[:, None] + 1)).astype(int)
    n = np.clip(n, -rmax, rmax)
    return t, n


def _size_t_sample(rng, size, params):
    t, n = _heat_points(rng, size, params)
    # concentrate half the points near the origin, where t^{N/2} G peaks
    n[: size // 2] = rng.integers(-2, 3, (size // 2, params["dim"]))
    return {"t": t, "n": n}


def _size_t_ratio(s, p):
    return s["t"] ** (p["dim"] / 2.0) * _g_point(s["n"], s["t"])


def _decay_n_sample(rng, size, params):
    _, n = _heat_points(rng, size, params)
    # t spread around |n|^2 / (2N), where G_t(n) is largest for fixed n
    l1 = np.abs(n).sum(axis=1) + 1.0
    t = l1 ** 2 / (2.0 * params["dim"]) * np.exp(rng.uniform(-4.0, 2.0, size))
    return {"t": t, "n": n}


def _decay_n_ratio(s, p):
    l1 = np.abs(s["n"]).sum(axis=1)
    return (1.0 + l1) ** p["dim"] * _g_point(s["n"], s["t"])


def _pair_sample(rng, size, params, rmax=40, dmax=6):
    """Pairs with |n| > 2|n - m|, n != m (l1 lengths)."""
    N = params["dim"]
    _, n = _heat_points(rng, size, params, rmax)
    d = rng.integers(-dmax, dmax + 1, (size, N))
    d[np.abs(d).sum(axis=1) == 0, 0] = 1
    ok = np.abs(n).sum(axis=1) > 2 * np.abs(d).sum(axis=1)
    n, d = n[ok], d[ok]
    t = np.exp(rng.uniform(np.log(1e-2), np.log(1e3), n.shape[0]))
    axis = rng.integers(0, N, n.shape[0])
    return {"t": t, "n": n, "m": n - d, "axis": axis}


def _pair_loc(s, i):
    out = {"n": s["n"][i].tolist()}
    if "m" in s:
        out["m"] = s["m"][i].tolist()
    if "t" in s:
        out["t"] = float(s["t"][i])
    if "axis" in s:
        out["axis"] = int(s["axis"][i]) + 1
    return out


def _unit(axis, N):
    e = np.zeros((axis.size, N), dtype=int)
    e[np.arange(axis.size), axis] = 1
    return e


def _heat_diff_ratio(order, envelope):
    def ratio(s, p):
        N = p["dim"]
        K = 4.0 * N
        t, n, m = s["t"], s["n"], s["m"]
        e = _unit(s["axis"], N)
        if order == 0:
            lhs = _g_point(n, t) - _g_point(m, t)
        elif order == 1:
            lhs = (_g_point(n + e, t) - _g_point(n, t)) - (_g_point(m + e, t) - _g_point(m, t))
        else:
            lhs = ((_g_point(n + e, t) - 2 * _g_point(n, t) + _g_point(n - e, t))
                   - (_g_point(m + e, t) - 2 * _g_point(m, t) + _g_point(m - e, t)))
        dist = np.abs(n - m).sum(axis=1)
        z = (np.abs(n).sum(axis=1) + np.abs(m).sum(axis=1)) / K
        env = np.asarray(smoothness_envelope(envelope, t, z, N))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.abs(lhs) / (dist * env)
        # envelope underflow: both sides are below double precision there
        return np.where(env > 1e-280, r, 0.0)
    return ratio


# fractional and Riesz kernels on a fixed window

_KERNEL_RADIUS = 40


@lru_cache(maxsize=8)
def _frac_kernel(sigma, dim):
    return frac_integral_kernel(sigma, dim, _KERNEL_RADIUS).values


@lru_cache(maxsize=4)
def _riesz(dim):
    return riesz_kernel(1, dim, _KERNEL_RADIUS).values


def _kernel_pairs(rng, size, params):
    s = _pair_sample(rng, size, params, rmax=_KERNEL_RADIUS - 8, dmax=4)
    s.pop("t")
    return s


def _lookup(seq, pts):
    R = seq.radius
    return seq.values[tuple((pts[:, i] + R) for i in range(pts.shape[1]))]


def _frac_diff_ratio(order):
    def ratio(s, p):
        N, sigma = p["dim"], p["sigma"]
        K = _frac_kernel(sigma, N)
        n, m = s["n"], s["m"]
        e = _unit(s["axis"], N)
        if order == 1:
            lhs = _lookup(K, n) - _lookup(K, m)
        else:
            lhs = (_lookup(K, n + e) - _lookup(K, n)) - (_lookup(K, m + e) - _lookup(K, m))
        dist = np.abs(n - m).sum(axis=1)
        S = np.abs(n).sum(axis=1) + np.abs(m).sum(axis=1)
        return np.abs(lhs) * S ** (N + order - 2 * sigma) / dist
    return ratio


def _riesz_size_sample(rng, size, params):
    _, n = _heat_points(rng, size, params, _KERNEL_RADIUS - 1)
    return {"n": n}


def _riesz_size_ratio(s, p):
    n = s["n"]
    return (np.abs(n).sum(axis=1) + 1.0) ** p["dim"] * np.abs(_lookup(_riesz(p["dim"]), n))


def _riesz_smooth_ratio(s, p):
    n, m = s["n"], s["m"]
    Rk = _riesz(p["dim"])
    lhs = np.abs(_lookup(Rk, n) - _lookup(Rk, m))
    S = np.abs(n).sum(axis=1) + np.abs(m).sum(axis=1)
    return lhs * S ** (p["dim"] + 1) / np.abs(n - m).sum(axis=1)


# sequence-valued samples

def _seq_sample(radius_choices=(3, 4, 5)):
    def sample(rng, size, params):
        N = params.get("dim", 2)
        seqs = []
        for _ in range(size):
            R = int(rng.choice(radius_choices))
            seqs.append(LatticeSequence(rng.uniform(-1.0, 1.0, (2 * R + 1,) * N), N))
        return {"f": seqs}
    return sample


def _seq_loc(s, i):
    f = s["f"][i]
    return {"index": int(i), "radius": f.radius, "dim": f.dim}


def _principle_sample(rng, size, params):
    N = params["dim"]
    cases = []
    for _ in range(size):
        R = int(rng.integers(2, 5))
        f = rng.uniform(0.0, 1.0, (2 * R + 1,) * N) * (rng.random((2 * R + 1,) * N) < 0.7)
        n0 = tuple(int(v) for v in rng.integers(-R, R + 1, N))
        f[tuple(c + R for c in n0)] = 0.0
        cases.append((LatticeSequence(f, N), n0, float(rng.uniform(0.02, 0.98))))
    return {"cases": cases}


def _principle_ratio(s, p):
    return np.array([frac_power_at(f, n0, s_) for f, n0, s_ in s["cases"]])


def _comparison_sample(rng, size, params):
    N = params["dim"]
    cases = []
    for _ in range(size):
        R = int(rng.integers(2, 5))
        g = rng.uniform(-1.0, 1.0, (2 * R + 1,) * N)
        d = rng.uniform(0.0, 1.0, (2 * R + 1,) * N)
        n0 = tuple(int(v) for v in rng.integers(-R, R + 1, N))
        d[tuple(c + R for c in n0)] = 0.0
        cases.append((LatticeSequence(g + d, N), LatticeSequence(g, N), n0, float(rng.uniform(0.02, 0.98))))
    return {"cases": cases}


def _comparison_ratio(s, p):
    # (-Delta)^s f(n0) - (-Delta)^s g(n0), evaluated through f - g
    return np.array([frac_power_at(f - g, n0, s_) for f, g, n0, s_ in s["cases"]])


def _case_loc(s, i):
    c = s["cases"][i]
    return {"index": int(i), "n0": list(c[-2]), "s": c[-1]}


def _schauder_ratio(s, p):
    return np.array([schauder_ratio(f, p["sigma"], "c") for f in s["f"]])


def _holder_riesz_ratio(s, p):
    return np.array([riesz_holder_ratio(f, p["alpha"]) for f in s["f"]])


_SQ_GRID = TimeGridQuadrature(1e-3, 1e3, 16)


def _density(gamma_):
    return lambda t: np.cos(gamma_ * np.log(t))


def _laplace_dom_sample(rng, size, params):
    s = _seq_sample((2, 3))(rng, size, {"dim": 1})
    s["gamma"] = rng.uniform(0.0, 3.0, size)
    return s


def _laplace_dom_ratio(s, p):
    return np.array([multiplier_domination_ratio(f, _density(g), _SQ_GRID, radius=8, points=256)
                     for f, g in zip(s["f"], s["gamma"])])


def _poisson_dom_ratio(s, p):
    return np.array([poisson_heat_domination_ratio(f, _SQ_GRID, radius=8, points=256) for f in s["f"]])


def _equiv_ratio(upper):
    def ratio(s, p):
        r = np.array([gk_lp_ratio(f, p["k"], p["p"], grid=_SQ_GRID, radius=f.radius + 8) for f in s["f"]])
        return r if upper else 1.0 / r
    return ratio


def _maximal_heat_ratio(s, p):
    grid = geometric_time_grid(1e-2, 1e2, 4)
    out = []
    for f in s["f"]:
        m = maximal_heat(f, grid, radius=f.radius + 6)
        out.append(np.linalg.norm(m.values) / np.linalg.norm(f.values))
    return np.array(out)


# ------------------------------------------------------------------ registry

def _build_registry() -> dict:
    reg = {}

    def add(q: Inequality):
        reg[q.ident] = q

    add(Inequality("AM-GM-I", "bessel", "a_i > -1, 2 <= n <= 4, 1e-3 <= x <= 50",
                   _amgm_sample, _amgm_ratio, _amgm_loc, explicit=1.0, default_size=10_000))
    # positivity of I_a - I_{a+1} follows from monotonicity in the order, which
    # holds for a >= -1/2 only; the upper bound is checked on all of a > -1
    add(Inequality("diff-I", "bessel", "-1 < a <= 20 (lower bound for a >= -1/2), 1e-3 <= x <= 50",
                   _bessel_sampler(-1.0 + 1e-9, 20.0),
                   lambda s, p: inequality_ratio("diff-1", s["a"], s["x"], lower_bound=s["a"] >= -0.5),
                   _loc_ax,
                   explicit=1.0, default_size=10_000))
    add(Inequality("diff2-I", "bessel", "-1/2 <= a <= 20, 1e-3 <= x <= 50",
                   _bessel_sampler(-0.5, 20.0),
                   lambda s, p: inequality_ratio("diff-2", s["a"], s["x"]), _loc_ax,
                   explicit=1.0, default_size=10_000))
    add(Inequality("diff-3", "bessel", "-1/2 <= a <= 20, 1e-3 <= x <= 50",
                   _bessel_sampler(-0.5, 20.0),
                   lambda s, p: inequality_ratio("diff-3", s["a"], s["x"]), _loc_ax,
                   default_size=10_000))
    add(Inequality("cantabros", "bessel", "-1/2 <= a <= 20, 1e-3 <= x <= 50",
                   _bessel_sampler(-0.5, 20.0),
                   lambda s, p: inequality_ratio("ratio-bounds", s["a"], s["x"]), _loc_ax,
                   explicit=1.0, default_size=10_000))
    add(Inequality("bound-I", "bessel", "alpha < a <= alpha + 20, 1e-3 <= x <= 50",
                   _bound_sample,
                   lambda s, p: inequality_ratio("uniform-order", s["a"], s["x"], alpha=np.full(s["a"].shape, p["alpha"])),
                   _loc_ax, default_size=2_000,
                   variants=tuple({"alpha": a} for a in BOUND_I_ALPHAS)))
    add(Inequality("sum-L1", "bessel", "1e-3 <= t <= 1e3",
                   _sum_l1_sample, _sum_l1_ratio, _loc_ax, explicit=1.0, default_size=200))

    dims = tuple({"dim": d} for d in (1, 2, 3))
    add(Inequality("size-G-t", "heat", "1e-2 <= t <= 1e3, |n_i| <= 40",
                   _size_t_sample, _size_t_ratio, _pair_loc, default_size=3000, variants=dims))
    add(Inequality("Gt-decay-n", "heat", "|n_i| <= 40, t near |n|^2/(2N)",
                   _decay_n_sample, _decay_n_ratio, _pair_loc, default_size=3000, variants=dims))
    for ident, order, env in (("diff-G", 0, "H"), ("diff2-G", 1, "H2"), ("diff3-G", 2, "H3")):
        add(Inequality(ident, "heat", "|n| > 2|n - m|, 1e-2 <= t <= 1e3, K = 4N",
                       _pair_sample, _heat_diff_ratio(order, env), _pair_loc,
                       default_size=3000, variants=dims, K=lambda p: 4.0 * p["dim"]))
    add(Inequality("maximal-heat", "heat", "N = 1, random f on radius <= 5, t-grid [1e-2, 1e2]",
                   _seq_sample(), _maximal_heat_ratio, _seq_loc, default_size=20,
                   variants=({"dim": 1},)))

    sig = tuple({"dim": 2, "sigma": s} for s in (0.25, 0.5, 0.75))
    add(Inequality("diff-K", "fractional", "N = 2, |n| > 2|n - m|, window radius 40",
                   _kernel_pairs, _frac_diff_ratio(1), _pair_loc, default_size=3000, variants=sig))
    add(Inequality("diff2-K", "fractional", "N = 2, |n| > 2|n - m|, window radius 40",
                   _kernel_pairs, _frac_diff_ratio(2), _pair_loc, default_size=3000, variants=sig))
    add(Inequality("schauder-c", "fractional", "N = 2, random f with |f| <= 1",
                   _seq_sample((3, 4)), _schauder_ratio, _seq_loc, default_size=40,
                   variants=({"dim": 2, "sigma": 0.25},)))
    add(Inequality("max-principle", "fractional", "f >= 0, f(n0) = 0, 0 < s < 1",
                   _principle_sample, _principle_ratio, _case_loc, explicit=0.0, atol=1e-12,
                   default_size=1000, variants=({"dim": 1}, {"dim": 2})))
    add(Inequality("comparison", "fractional", "f >= g, f(n0) = g(n0), 0 < s < 1",
                   _comparison_sample, _comparison_ratio, _case_loc, explicit=0.0, atol=1e-12,
                   default_size=1000, variants=({"dim": 1}, {"dim": 2})))

    add(Inequality("size-Riesz", "riesz", "N = 2, |n_i| < 40",
                   _riesz_size_sample, _riesz_size_ratio, _pair_loc, default_size=3000,
                   variants=({"dim": 2},)))
    add(Inequality("smooth-Riesz", "riesz", "N = 2, |n| > 2|n - m|, window radius 40",
                   _kernel_pairs, _riesz_smooth_ratio, _pair_loc, default_size=3000,
                   variants=({"dim": 2},)))
    add(Inequality("holder-Riesz", "riesz", "N = 2, random f on radius 3-4",
                   _seq_sample((3, 4)), _holder_riesz_ratio, _seq_loc, default_size=20,
                   variants=tuple({"dim": 2, "alpha": a} for a in (0.1, 0.25, 0.4))))

    add(Inequality("laplace-domination", "squarefn", "N = 1, a(t) = cos(gamma log t), 0 <= gamma <= 3",
                   _laplace_dom_sample, _laplace_dom_ratio, _seq_loc, default_size=10))
    add(Inequality("poisson-heat-domination", "squarefn", "N = 1, random f, torus of 256 points",
                   _seq_sample((2, 3)), _poisson_dom_ratio, _seq_loc, explicit=float(np.sqrt(2.0)),
                   default_size=10, variants=({"dim": 1},)))
    for upper in (True, False):
        ident = "equiv-gk-upper" if upper else "equiv-gk-lower"
        add(Inequality(ident, "squarefn", "N = 1, k = 1, random f, unweighted l^p",
                       _seq_sample((2, 3)), _equiv_ratio(upper), _seq_loc, default_size=10,
                       variants=tuple({"dim": 1, "k": 1, "p": p} for p in (1.5, 2.0, 3.0))))
    return reg


REGISTRY = _build_registry()
SUITES = tuple(sorted({q.suite for q in REGISTRY.values()}))


def _get(ident: str) -> Inequality:
    if ident not in REGISTRY:
        raise DomainError(f"unregistered inequality id {ident!r}")
    return REGISTRY[ident]


def _finite_max(r: np.ndarray) -> tuple:
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        raise DomainError("empty grid")
    i = int(np.argmax(np.where(np.isnan(r), np.inf, r)))
    return float(r[i]), i


def calibrate(ident: str, grid: GridSpec = GridSpec(), safety: float = DEFAULT_SAFETY,
              params: dict | None = None) -> CalibratedConstant:
    """C = safety x max ratio over the seeded grid.

    Inequalities with an explicit constant return that constant unchanged
    (the grid maximum is still recorded). Pure sign conditions have nothing to
    calibrate.
    """
    q = _get(ident)
    p = dict(q.variants[0] if params is None else params)
    size = q.default_size if grid.size is None else grid.size
    if size <= 0:
        raise DomainError("empty grid")
    if safety < 1.1:
        raise DomainError("safety factor must be at least 1.1")
    if q.explicit == 0.0:
        raise DomainError(f"{ident} is a sign condition with no constant")
    rng = np.random.default_rng([grid.seed, _stable_hash(fixture_key(ident, p))])
    sample = q.sampler(rng, size, p)
    mx, _ = _finite_max(q.ratio(sample, p))
    if q.explicit is not None:
        C = q.explicit
    else:
        if not np.isfinite(mx) or mx <= 0:
            raise ArithmeticError(f"calibration of {ident} produced max ratio {mx}")
        C = safety * mx
    return CalibratedConstant(ident, p, q.domain, {"seed": grid.seed, "size": size}, float(C),
                              float(safety), float(mx), q.K(p) if q.K else None, grid.seed)


def _stable_hash(s: str) -> int:
    h = 0
    for ch in s.encode():
        h = (h * 131 + ch) % (2 ** 31 - 1)
    return h


def calibrate_all(ids=None, seed: int = CALIBRATION_SEED, safety: float = DEFAULT_SAFETY,
                  size_scale: float = CALIBRATION_SCALE) -> dict:
    """Calibrate every variant of the given ids (default: all) into a fixture dict.

    Calibration grids are ``size_scale`` times the verification size.
    """
    entries = {}
    for ident in (ids or REGISTRY):
        q = _get(ident)
        if q.explicit is not None:
            continue
        for p in q.variants:
            size = max(1, int(round(q.default_size * size_scale)))
            c = calibrate(ident, GridSpec(seed, size), safety, p)
            entries[c.key] = asdict(c)
    return {"version": FIXTURE_VERSION, "tool_version": __version__, "entries": entries}


def save_fixtures(fixtures: dict, path: Path | str = FIXTURE_PATH):
    Path(path).write_text(json.dumps(fixtures, indent=1, sort_keys=True) + "\n")


def load_fixtures(path: Path | str = FIXTURE_PATH) -> dict:
    p = Path(path)
    if not p.exists():
        raise DomainError(f"missing fixture file {p}")
    return json.loads(p.read_text())


def _resolve(ids) -> list:
    if ids is None or ids == "all":
        return list(REGISTRY)
    if isinstance(ids, str):
        if ids in SUITES:
            return [k for k, q in REGISTRY.items() if q.suite == ids]
        return [_get(ids).ident]
    return [_get(i).ident for i in ids]


def run_suite(ids="all", seed: int = 7, fixtures: dict | None = None,
              size: int | None = None) -> SuiteReport:
    """Verify the given ids (or a suite name, or "all") on a fresh grid drawn from ``seed``."""
    fx = load_fixtures() if fixtures is None else fixtures
    entries = fx.get("entries", {})
    items = []
    for ident in _resolve(ids):
        q = _get(ident)
        for p in q.variants:
            key = fixture_key(ident, p)
            if q.explicit is not None:
                C = q.explicit
            else:
                if key not in entries:
                    raise DomainError(f"missing fixture for {key}")
                ent = entries[key]
                if int(ent["seed"]) == seed:
                    raise DomainError("verification seed must differ from the calibration seed")
                C = float(ent["C"])
            n = q.default_size if size is None else size
            rng = np.random.default_rng([seed, _stable_hash(key)])
            sample = q.sampler(rng, n, p)
            r = np.asarray(q.ratio(sample, p), dtype=float)
            thresh = C * (1.0 + STRICT_RTOL) + q.atol if q.explicit is not None else C
            worst, i = _finite_max(r)
            passed = bool(np.all(r <= thresh))
            items.append(ItemResult(key, passed, float(C - worst), worst, float(C), int(r.size),
                                    q.locate(sample, i)))
    return SuiteReport(seed, items)


def corrupt(fixtures: dict, key: str, factor: float = 0.5) -> dict:
    """Copy of the fixtures with one constant scaled (for falsifiability checks)."""
    out = json.loads(json.dumps(fixtures))
    if key not in out["entries"]:
        raise DomainError(f"no fixture entry {key}")
    out["entries"][key]["C"] *= factor
    return out

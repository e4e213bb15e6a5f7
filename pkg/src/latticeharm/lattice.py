"""Lattice geometry, sequences on box windows, differences, norms and weights.

Sequences on Z^N are stored densely on the box |n_i| <= R and are taken to be
zero outside it. The lattice length |n| is always the l1 length.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve


class DomainError(ValueError):
    """Raised when an argument violates an operator's parameter domain."""


@dataclass(frozen=True)
class Window:
    dim: int
    radius: int

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("requires dimension N >= 1")
        if self.radius < 0:
            raise DomainError("requires radius R >= 0")

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def shape(self) -> tuple:
        return (self.side,) * self.dim

    @property
    def size(self) -> int:
        return self.side ** self.dim

    def axis_coords(self) -> np.ndarray:
        return np.arange(-self.radius, self.radius + 1)

    def coords(self) -> list:
        """Open mesh of coordinate arrays, one per axis."""
        c = self.axis_coords()
        return list(np.meshgrid(*([c] * self.dim), indexing="ij", sparse=True))

    def l1_length(self) -> np.ndarray:
        """|n| = |n_1| + ... + |n_N| on the window."""
        out = np.zeros(self.shape, dtype=np.int64)
        for c in self.coords():
            out = out + np.abs(c)
        return out

    def index(self, n) -> tuple:
        n = tuple(int(v) for v in np.atleast_1d(n))
        if len(n) != self.dim:
            raise DomainError(f"point has {len(n)} coordinates, window has N={self.dim}")
        return tuple(v + self.radius for v in n)

    def contains(self, n) -> bool:
        return all(abs(int(v)) <= self.radius for v in np.atleast_1d(n))


def _as_window(dim, radius) -> Window:
    return Window(int(dim), int(radius))


class LatticeSequence:
    """Finitely supported sequence on Z^N, dense on a centred box window."""

    __slots__ = ("window", "values")

    def __init__(self, values, dim: int | None = None):
        v = np.asarray(values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if dim is None:
            dim = v.ndim
        if v.ndim != dim or len(set(v.shape)) != 1 or v.shape[0] % 2 != 1:
            raise DomainError("values must be a cube array with odd side 2R+1")
        if not np.all(np.isfinite(v)):
            raise DomainError("sequence values must be finite")
        self.window = _as_window(dim, (v.shape[0] - 1) // 2)
        v = v.copy()
        v.setflags(write=False)
        self.values = v

    # construction
    @classmethod
    def zeros(cls, dim: int, radius: int, dtype=float) -> "LatticeSequence":
        return cls(np.zeros((2 * radius + 1,) * dim, dtype=dtype), dim)

    @classmethod
    def delta(cls, dim: int, radius: int, at=None) -> "LatticeSequence":
        v = np.zeros((2 * radius + 1,) * dim)
        w = _as_window(dim, radius)
        v[w.index(at if at is not None else [0] * dim)] = 1.0
        return cls(v, dim)

    @classmethod
    def from_function(cls, dim: int, radius: int, fn) -> "LatticeSequence":
        w = _as_window(dim, radius)
        v = np.broadcast_to(np.asarray(fn(*w.coords())), w.shape)
        return cls(np.array(v), dim)

    @classmethod
    def random(cls, dim: int, radius: int, rng, support: int | None = None,
               mean_zero: bool = False) -> "LatticeSequence":
        """Standard normal values on the box of radius ``support`` (default: all)."""
        support = radius if support is None else support
        v = np.zeros((2 * radius + 1,) * dim)
        inner = rng.standard_normal((2 * support + 1,) * dim)
        if mean_zero:
            inner -= inner.mean()
        sl = tuple(slice(radius - support, radius + support + 1) for _ in range(dim))
        v[sl] = inner
        return cls(v, dim)

    # basic access
    @property
    def dim(self) -> int:
        return self.window.dim

    @property
    def radius(self) -> int:
        return self.window.radius

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def __getitem__(self, n):
        if not self.window.contains(n):
            return 0.0
        return self.values[self.window.index(n)]

    def __repr__(self):
        return f"LatticeSequence(N={self.dim}, R={self.radius}, dtype={self.values.dtype})"

    def total(self):
        """Sum over the lattice."""
        return self.values.sum()

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, LatticeSequence):
            if other.dim != self.dim:
                raise DomainError("dimension mismatch")
            r = max(self.radius, other.radius)
            return self.pad(r).values, other.pad(r).values
        return self.values, other

    def __add__(self, other):
        a, b = self._coerce(other)
        return LatticeSequence(a + b, self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return LatticeSequence(a - b, self.dim)

    def __neg__(self):
        return LatticeSequence(-self.values, self.dim)

    def __mul__(self, c):
        if isinstance(c, LatticeSequence):
            a, b = self._coerce(c)
            return LatticeSequence(a * b, self.dim)
        return LatticeSequence(self.values * c, self.dim)

    __rmul__ = __mul__

    def real(self) -> "LatticeSequence":
        return LatticeSequence(self.values.real, self.dim)

    # window changes
    def pad(self, radius: int) -> "LatticeSequence":
        """Same sequence stored on a larger window."""
        if radius < self.radius:
            raise DomainError("pad radius smaller than current radius")
        if radius == self.radius:
            return self
        d = radius - self.radius
        return LatticeSequence(np.pad(self.values, d), self.dim)

    def crop(self, radius: int) -> "LatticeSequence":
        """Restriction to the window of the given radius (may drop support)."""
        if radius >= self.radius:
            return self.pad(radius)
        d = self.radius - radius
        sl = tuple(slice(d, d + 2 * radius + 1) for _ in range(self.dim))
        return LatticeSequence(self.values[sl], self.dim)

    def shift(self, e) -> "LatticeSequence":
        """g(n) = f(n + e), zero-extended, same window."""
        e = np.atleast_1d(e).astype(int)
        v = np.zeros_like(self.values)
        R = self.radius
        src, dst = [], []
        for ei in e:
            if abs(ei) > 2 * R:
                return LatticeSequence(v, self.dim)
            if ei >= 0:
                src.append(slice(ei, 2 * R + 1))
                dst.append(slice(0, 2 * R + 1 - ei))
            else:
                src.append(slice(0, 2 * R + 1 + ei))
                dst.append(slice(-ei, 2 * R + 1))
        v[tuple(dst)] = self.values[tuple(src)]
        return LatticeSequence(v, self.dim)

    # serialization
    def to_dict(self) -> dict:
        vals = self.values.ravel()
        if self.is_complex:
            data = [[float(z.real), float(z.imag)] for z in vals]
        else:
            data = [float(z) for z in vals]
        return {"dim": self.dim, "radius": self.radius, "complex": self.is_complex,
                "values": data}

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSequence":
        dim, R = int(d["dim"]), int(d["radius"])
        vals = np.asarray(d["values"], dtype=float)
        if d.get("complex", False):
            vals = vals[:, 0] + 1j * vals[:, 1]
        return cls(vals.reshape((2 * R + 1,) * dim), dim)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "LatticeSequence":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class Weight:
    """Positive weight on a window; ``values`` must be strictly positive."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(v > 0) or not np.all(np.isfinite(v)):
            raise DomainError("weight values must be finite and strictly positive")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def radius(self) -> int:
        return (self.values.shape[0] - 1) // 2

    @classmethod
    def power(cls, dim: int, radius: int, exponent: float) -> "Weight":
        """w(n) = (1 + |n|)^exponent."""
        w = _as_window(dim, radius)
        return cls((1.0 + w.l1_length()) ** exponent)

    @classmethod
    def ones(cls, dim: int, radius: int) -> "Weight":
        return cls(np.ones((2 * radius + 1,) * dim))


def _check_axis(f: LatticeSequence, axis: int) -> int:
    if not 1 <= axis <= f.dim:
        raise DomainError(f"axis must be in 1..{f.dim}")
    return axis - 1


def forward_diff(f: LatticeSequence, axis: int) -> LatticeSequence:
    """(delta_i^+ f)(n) = f(n + e_i) - f(n); the last face sees the zero extension."""
    ax = _check_axis(f, axis)
    e = np.zeros(f.dim, dtype=int)
    e[ax] = 1
    return f.shift(e) - f


def backward_diff(f: LatticeSequence, axis: int) -> LatticeSequence:
    """(delta_i^- f)(n) = f(n) - f(n - e_i)."""
    ax = _check_axis(f, axis)
    e = np.zeros(f.dim, dtype=int)
    e[ax] = -1
    return f - f.shift(e)


def laplacian(f: LatticeSequence) -> LatticeSequence:
    """Sum over axes of f(n + e_i) - 2 f(n) + f(n - e_i)."""
    out = -2.0 * f.dim * f.values
    for ax in range(1, f.dim + 1):
        e = np.zeros(f.dim, dtype=int)
        e[ax - 1] = 1
        out = out + f.shift(e).values + f.shift(-e).values
    return LatticeSequence(out, f.dim)


def convolve_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution of two cube arrays.

    Small problems use exact direct summation, larger ones scipy's FFT
    convolution. Both are deterministic for fixed inputs.
    """
    if a.size * b.size <= 200_000:
        from scipy.signal import convolve
        return convolve(a, b, method="direct")
    return fftconvolve(a, b)


def convolve(f: LatticeSequence, g: LatticeSequence, crop: int | None = None) -> LatticeSequence:
    """(f * g)(n) = sum_k f(n - k) g(k); output radius R_f + R_g unless cropped."""
    if f.dim != g.dim:
        raise DomainError("dimension mismatch in convolution")
    out = LatticeSequence(convolve_arrays(f.values, g.values), f.dim)
    return out if crop is None else out.crop(crop)


def lp_norm(f: LatticeSequence, p: float = 2.0, w: Weight | None = None) -> float:
    """Weighted l^p norm; p = inf is the plain supremum (the weight plays no role)."""
    p = float(p)
    if not p >= 1.0:
        raise DomainError("requires p >= 1")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if w is None:
        wv = 1.0
    else:
        wv = _weight_on(w, f)
    if p == 1.0:
        return float(np.sum(a * wv))
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((a / m) ** p * wv) ** (1.0 / p))


def _weight_on(w: Weight, f: LatticeSequence) -> np.ndarray:
    if w.dim != f.dim:
        raise DomainError("weight dimension mismatch")
    if w.radius < f.radius:
        raise DomainError("weight window must contain the sequence window")
    d = w.radius - f.radius
    sl = tuple(slice(d, d + 2 * f.radius + 1) for _ in range(f.dim))
    return w.values[sl]


def weak_l1_norm(f: LatticeSequence, w: Weight | None = None) -> float:
    """sup over lambda of lambda * w({|f| > lambda}), exact on the finite value set.

    The supremum is approached as lambda increases to each realised level |f(n)|,
    so the candidate for level v is v * w({|f| >= v}).
    """
    a = np.abs(f.values).ravel()
    wv = np.ones_like(a) if w is None else _weight_on(w, f).ravel()
    order = np.argsort(-a, kind="stable")
    a, wv = a[order], wv[order]
    cum = np.cumsum(wv)
    # group ties: mass of {|f| >= v} is the cumulative weight through the last tie
    last = np.r_[a[1:] != a[:-1], True]
    cand = a[last] * cum[last]
    return float(cand.max()) if cand.size else 0.0


def _pair_seminorm(vals: np.ndarray, dim: int, alpha: float, mask: np.ndarray) -> float:
    """max |v(n) - v(m)| / |n - m|^alpha over pairs of masked points."""
    idx = np.argwhere(mask)
    if len(idx) < 2:
        return 0.0
    v = vals[tuple(idx.T)]
    best = 0.0
    # chunked pair enumeration keeps memory bounded
    step = max(1, 4_000_000 // len(idx))
    for s in range(0, len(idx), step):
        d = np.abs(idx[s:s + step, None, :] - idx[None, :, :]).sum(axis=2)
        num = np.abs(v[s:s + step, None] - v[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(d > 0, num / np.where(d > 0, d, 1).astype(float) ** alpha, 0.0)
        best = max(best, float(r.max()))
    return best


def holder_seminorm(f: LatticeSequence, alpha: float, k: int = 0,
                    interior: int | None = None) -> float:
    """Hoelder seminorm of order k and exponent alpha on the window.

    For k = 0 this is the maximum over point pairs of |f(n) - f(m)| / |n - m|^alpha.
    For k >= 1 it is the sum, over multi-indices m with |m| = k, of the k = 0
    seminorm of the differenced sequence, using only points whose differences do
    not reach the zero extension. ``interior`` optionally restricts to the box of
    that radius.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError("requires 0 < alpha <= 1")
    if k < 0:
        raise DomainError("requires order k >= 0")
    N, R = f.dim, f.radius
    r_int = R if interior is None else min(interior, R)
    if k == 0:
        mask = np.abs(f.window.coords()[0]) <= r_int
        for c in f.window.coords()[1:]:
            mask = mask & (np.abs(c) <= r_int)
        return _pair_seminorm(f.values, N, alpha, np.broadcast_to(mask, f.window.shape))
    total = 0.0
    for m in _multi_indices(N, k):
        g = f
        for ax, cnt in enumerate(m):
            for _ in range(cnt):
                g = forward_diff(g, ax + 1)
        mask = np.ones(f.window.shape, dtype=bool)
        for ax, c in enumerate(f.window.coords()):
            # forward differences read up to m_ax points ahead; keep one more
            # point of margin from the truncation band
            mask = mask & (c <= min(r_int, R - m[ax] - 1)) & (c >= -r_int)
        total += _pair_seminorm(g.values, N, alpha, mask)
    return total


def _multi_indices(N: int, k: int):
    for combo in itertools.combinations_with_replacement(range(N), k):
        m = [0] * N
        for c in combo:
            m[c] += 1
        yield tuple(m)


def ap_constant(w: Weight, p: float, max_side: int) -> float:
    """Largest A_p product over axis-aligned cubes of side <= max_side in the window.

    The product for a cube Q is (avg_Q w) * (avg_Q w^{-1/(p-1)})^{p-1}; averages
    come from summed-area tables.
    """
    p = float(p)
    if not p > 1.0:
        raise DomainError("requires p > 1")
    if max_side < 1:
        raise DomainError("requires max_side >= 1")
    a = w.values
    b = a ** (-1.0 / (p - 1.0))
    sa, sb = _summed_area(a), _summed_area(b)
    best = 0.0
    for s in range(1, min(max_side, a.shape[0]) + 1):
        ma = _box_sums(sa, s) / s ** a.ndim
        mb = _box_sums(sb, s) / s ** a.ndim
        best = max(best, float(np.max(ma * mb ** (p - 1.0))))
    return best


def _summed_area(a: np.ndarray) -> np.ndarray:
    s = np.pad(a, [(1, 0)] * a.ndim)
    for ax in range(a.ndim):
        s = np.cumsum(s, axis=ax)
    return s


def _box_sums(s: np.ndarray, side: int) -> np.ndarray:
    """Sums over all cubes of the given side from a zero-padded summed-area table."""
    N = s.ndim
    n = s.shape[0] - 1
    out = 0.0
    for corner in itertools.product((0, 1), repeat=N):
        sl = tuple(slice(side, n + 1) if c else slice(0, n + 1 - side) for c in corner)
        sign = (-1) ** (N - sum(corner))
        out = out + sign * s[sl]
    return out

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import scaled_bessel_series

from latticeharm.heat import (auto_radius, decay_slope_fit, envelope_l1_norm, evolve,
                              geometric_grid, geometric_time_grid, heat_kernel, kernel_norm,
                              loglog_slope, mass_residual, mass_slope_fit, maximal_heat,
                              predicted_decay_slope, predicted_mass_slope, smoothness_envelope)
from latticeharm.bessel import scaled_bessel_i
from latticeharm.lattice import DomainError, LatticeSequence, laplacian, lp_norm
from latticeharm.verify import load_fixtures


def test_kernel_values_against_series():
    G = heat_kernel(1.0, 1, 6)
    for n in range(-6, 7):
        assert G.values[(n,)] == pytest.approx(scaled_bessel_series(abs(n), 2.0), rel=1e-13)
    G2 = heat_kernel(0.5, 2, 4)
    ref = scaled_bessel_series(1, 1.0) * scaled_bessel_series(2, 1.0)
    assert G2.values[(1, -2)] == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("t,dim", [(0.1, 1), (1.0, 2), (7.5, 3), (40.0, 1)])
def test_positivity_and_normalization(t, dim):
    G = heat_kernel(t, dim)
    v = G.values.values
    assert np.all(v > 0)
    missing = 1.0 - v.sum()
    assert -1e-14 <= missing <= G.tail_mass_bound + 1e-14
    assert G.tail_mass_bound <= 1e-10


def test_symmetry_under_flips_and_permutations():
    v = heat_kernel(2.0, 3, 5).values.values
    # permutations change only the order of the axis products
    for axes in itertools.permutations(range(3)):
        np.testing.assert_allclose(np.transpose(v, axes), v, rtol=4e-16, atol=0)
    for ax in range(3):
        np.testing.assert_array_equal(np.flip(v, ax), v)


def test_auto_radius_meets_tolerance():
    R, tail = auto_radius(3.0, 2, 1e-12)
    assert tail <= 1e-12
    G = heat_kernel(3.0, 2, R)
    assert 1.0 - G.values.total() <= 1e-12
    with pytest.raises(DomainError):
        auto_radius(-1.0)


def test_domain_errors():
    with pytest.raises(DomainError):
        heat_kernel(0.0, 1)
    with pytest.raises(DomainError):
        heat_kernel(1.0, 0)
    with pytest.raises(DomainError):
        heat_kernel(1.0, 1, -2)


def test_markov_on_ones():
    one = LatticeSequence(np.ones(81))
    out = evolve(one, 2.0, radius=20)
    np.testing.assert_allclose(out.values, 1.0, atol=1e-10)


@pytest.mark.parametrize("t1,t2", [(0.5, 0.5), (1.0, 2.0), (5.0, 5.0)])
def test_semigroup_on_delta(t1, t2):
    d = LatticeSequence.delta(2, 0)
    two = evolve(evolve(d, t1), t2)
    one = evolve(d, t1 + t2)
    R = min(two.radius, one.radius)
    np.testing.assert_allclose(two.crop(R).values, one.crop(R).values, atol=1e-8)


def test_heat_equation_residual():
    f = LatticeSequence.random(1, 5, np.random.default_rng(0))
    t, h = 1.5, 1e-4
    dt = (evolve(f, t + h, radius=10).values - evolve(f, t - h, radius=10).values) / (2 * h)
    lap = laplacian(evolve(f, t, radius=11)).crop(10).values
    np.testing.assert_allclose(dt, lap, atol=1e-7)


def test_small_time_continuity():
    rng = np.random.default_rng(1)
    ratios = []
    for _ in range(20):
        f = LatticeSequence.random(1, 6, rng)
        for t in (1e-3, 1e-2, 1e-1):
            d = evolve(f, t, radius=6) - f
            ratios.append(lp_norm(d, np.inf) / (t * lp_norm(f, 2)))
    # |W_t f - f| <= C t ||f||_2 with C about 2 (||Delta||_{2->inf})
    assert max(ratios) <= 4.0


def test_evolve_zero_time_is_identity():
    f = LatticeSequence.random(2, 2, np.random.default_rng(2))
    assert evolve(f, 0.0) is f
    with pytest.raises(DomainError):
        evolve(f, -1.0)


# ---------------------------------------------------------------- decay laws

def test_kernel_norm_product_structure():
    t = 3.0
    G = heat_kernel(t, 2, "auto", 1e-14).values
    for r in (1.0, 2.0, 3.0, np.inf):
        assert kernel_norm(t, 2, r) == pytest.approx(lp_norm(G, r), rel=1e-12)


def test_decay_slope_l1_is_flat():
    slope, norms = decay_slope_fit(1, 1.0, geometric_grid(1, 256))
    assert slope == 0.0
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


@pytest.mark.parametrize("dim,r,tmax,tol", [(1, 2.0, 4096, 0.02), (2, np.inf, 4096, 0.03),
                                            (3, 2.0, 1024, 0.03)])
def test_decay_slopes(dim, r, tmax, tol):
    slope, _ = decay_slope_fit(dim, r, geometric_grid(16, tmax))
    assert slope == pytest.approx(predicted_decay_slope(dim, r), abs=tol)


def test_degenerate_grids():
    with pytest.raises(DomainError):
        decay_slope_fit(1, 2.0, [1.0, 2.0, 4.0])
    with pytest.raises(DomainError):
        decay_slope_fit(1, 2.0, [1.0, 4.0, 2.0, 8.0])
    with pytest.raises(DomainError):
        geometric_grid(4.0, 2.0)
    with pytest.raises(DomainError):
        loglog_slope([1.0], [1.0])


def test_geometric_grid():
    g = geometric_grid(1, 1024)
    assert g[0] == 1 and g[-1] == 1024 and g.size == 11
    g = geometric_time_grid(1e-2, 1e2)
    assert g.size == 129 and np.allclose(np.diff(np.log(g)), np.log(10) / 32)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 50), st.floats(1.0, 8.0))
def test_norm_interpolation(t, r):
    n1, ninf, nr = kernel_norm(t, 1, 1), kernel_norm(t, 1, np.inf), kernel_norm(t, 1, r)
    assert nr <= n1 ** (1 / r) * ninf ** (1 - 1 / r) * (1 + 1e-12)


# ---------------------------------------------------------------- mass distribution

def test_mass_slope_linf():
    f = LatticeSequence(np.array([0, 0, 1.0, -1.0, 2.0]))
    slope, res = mass_slope_fit(f, np.inf, 1.0, geometric_grid(64, 8192))
    assert f.total() == 2
    assert slope == pytest.approx(predicted_mass_slope(1, np.inf, 1.0), abs=0.05)
    assert np.all(res > 0)


def test_mass_slope_p_equals_q():
    f = LatticeSequence(np.array([0, 0, 1.0, -1.0, 2.0]))
    slope, _ = mass_slope_fit(f, 1.0, 1.0, geometric_grid(64, 8192))
    assert slope == pytest.approx(-0.5, abs=0.05)
    # for p = q = 2 the bound exponent -1/2 is not sharp: compact data gives -1/2 - 1/4
    slope2, _ = mass_slope_fit(f, 2.0, 2.0, geometric_grid(64, 8192))
    assert slope2 <= -0.5 and slope2 == pytest.approx(-0.75, abs=0.05)


def test_mass_zero_data_refused():
    f = LatticeSequence(np.array([1.0, -2.0, 1.0]))
    with pytest.raises(DomainError):
        mass_slope_fit(f, np.inf, 1.0, geometric_grid(1, 64))
    with pytest.raises(DomainError):
        mass_residual(f, 1.0, 2.0)


def test_mass_exponent_domain():
    f = LatticeSequence.delta(2, 1)
    with pytest.raises(DomainError):
        mass_slope_fit(f, np.inf, 2.0, geometric_grid(1, 64))
    with pytest.raises(DomainError):
        mass_slope_fit(LatticeSequence.delta(1, 1), 1.0, 2.0, geometric_grid(1, 64))


def test_mass_residual_for_sampled_kernel():
    f = heat_kernel(1.0, 1, 12).values
    r = mass_residual(f, 4.0, 2.0)
    assert np.isfinite(r) and r > 0


# ---------------------------------------------------------------- envelopes and maximal function

def test_envelope_spot_value():
    v = smoothness_envelope("H", 1.0, 1.0, 1)
    assert v == pytest.approx(scaled_bessel_series(1, 2.0), rel=1e-13)
    assert v == pytest.approx(0.2153, abs=1e-4)


def test_envelopes_positive_and_errors():
    z = np.linspace(0.1, 20, 50)
    for kind in ("H", "H2", "H3"):
        assert np.all(smoothness_envelope(kind, 2.0, z, 2) > 0)
    with pytest.raises(DomainError):
        smoothness_envelope("H", 0.0, 1.0, 1)
    with pytest.raises(DomainError):
        smoothness_envelope("H", 1.0, -1.0, 1)
    with pytest.raises(DomainError):
        smoothness_envelope("X", 1.0, 1.0, 1)


def test_envelope_l1_decay():
    t = geometric_grid(16, 1024)
    vals = [envelope_l1_norm("H", ti, 1, 2.0) for ti in t]
    assert loglog_slope(t, vals) == pytest.approx(-0.5, abs=0.1)


def test_maximal_heat_dominates_each_time():
    rng = np.random.default_rng(3)
    f = LatticeSequence(np.abs(rng.normal(size=9)))
    grid = geometric_time_grid(1e-2, 1e2, 8)
    M = maximal_heat(f, grid)
    for t in grid:
        assert np.all(M.values >= evolve(f, t, radius=f.radius).values - 1e-15)
    with pytest.raises(DomainError):
        maximal_heat(f, [])


def test_maximal_heat_of_delta_peaks_at_smallest_time():
    d = LatticeSequence.delta(1, 3)
    grid = geometric_time_grid(1e-2, 1e2, 8)
    M = maximal_heat(d, grid)
    assert M[(0,)] == pytest.approx(heat_kernel(grid[0], 1, 3).values[(0,)], rel=1e-14)
    g0 = [heat_kernel(t, 1, 0).values[(0,)] for t in grid]
    assert np.all(np.diff(g0) < 0)


# ---------------------------------------------------------------- uniform size bound

def test_size_bound_constant_matches_dense_scan():
    # sup_t sqrt(t) G_{t,1}(n) is attained at n = 0, t about 0.4
    t = np.geomspace(1e-2, 1e3, 20001)
    scan = max(float(np.max(np.sqrt(t) * scaled_bessel_i(n, 2 * t))) for n in range(6))
    dense = max(math.sqrt(ti) * scaled_bessel_series(0, 2 * ti) for ti in np.linspace(0.3, 0.5, 201))
    assert dense == pytest.approx(0.3315, abs=2e-4)
    assert scan <= dense + 1e-12
    fx = load_fixtures()["entries"]["size-G-t[dim=1]"]
    assert fx["max_ratio"] <= dense + 1e-12
    assert fx["max_ratio"] == pytest.approx(dense, rel=1e-3)
    assert fx["C"] == pytest.approx(fx["safety"] * fx["max_ratio"], rel=1e-14)


def test_size_bound_large_time_limit():
    for t in (1e4, 1e6):
        v = math.sqrt(t) * heat_kernel(t, 1, 0).values[(0,)]
        assert v == pytest.approx((4 * math.pi) ** -0.5, rel=2e-4)

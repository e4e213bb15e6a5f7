import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from latticeharm.lattice import DomainError, LatticeSequence, convolve, lp_norm
from latticeharm.spectral import (TorusGrid, apply_multiplier, default_grid, dft, idft,
                                  imaginary_power_density, l2_norm_torus,
                                  laplace_multiplier_values, mean_zero, symbol)


def test_dft_of_delta_is_one():
    g = TorusGrid(2, 16)
    np.testing.assert_allclose(dft(LatticeSequence.delta(2, 3), g), 1.0, atol=1e-15)


def test_dft_of_shifted_delta():
    g = TorusGrid(1, 32)
    f = LatticeSequence.delta(1, 3).shift([-2])  # mass at n = 2
    x = g.axis_nodes()
    np.testing.assert_allclose(dft(f, g), np.exp(4j * np.pi * x), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_parseval_and_round_trip(seed, dim):
    rng = np.random.default_rng(seed)
    f = LatticeSequence.random(dim, 3, rng)
    g = TorusGrid(dim, 8)
    F = dft(f, g)
    assert l2_norm_torus(F) == pytest.approx(lp_norm(f, 2), rel=1e-12)
    back = idft(F, g, 3)
    np.testing.assert_allclose(back.values, f.values, atol=1e-12)


def test_convolution_theorem():
    rng = np.random.default_rng(1)
    f, h = LatticeSequence.random(2, 3, rng), LatticeSequence.random(2, 2, rng)
    g = TorusGrid(2, 16)
    np.testing.assert_allclose(dft(convolve(f, h), g), dft(f, g) * dft(h, g), atol=1e-11)


def test_grid_checks():
    with pytest.raises(DomainError):
        TorusGrid(1, 7)
    with pytest.raises(DomainError):
        dft(LatticeSequence.delta(1, 5), TorusGrid(1, 8))
    with pytest.raises(DomainError):
        apply_multiplier(LatticeSequence.delta(1, 5), symbol("identity", TorusGrid(1, 16)))
    with pytest.raises(DomainError):
        symbol("nope", TorusGrid(1, 16))
    with pytest.raises(DomainError):
        symbol("frac_neg", TorusGrid(1, 16), sigma=0.5)
    with pytest.raises(DomainError):
        symbol("riesz", TorusGrid(2, 16), axis=3)


def test_default_grid_sizes():
    assert default_grid(1, 3).points == 16384
    assert default_grid(2, 3).points == 512
    assert default_grid(3, 40).points == 512
    assert default_grid(2, 3, 64).points == 64


def test_heat_symbol_matches_kernel():
    from latticeharm.heat import heat_kernel
    g = TorusGrid(2, 64)
    K = heat_kernel(1.5, 2, 25, 1e-14).values
    np.testing.assert_allclose(dft(K, g), symbol("heat", g, t=1.5).values, atol=1e-12)


def test_riesz_symbol_modulus():
    g = TorusGrid(2, 32)
    S = g.sin2()
    total = sum(np.abs(symbol("riesz", g, axis=i).values) ** 2 for i in (1, 2))
    assert np.all(np.abs(symbol("riesz", g, axis=1).values) <= 1 + 1e-15)
    off = S > 0
    np.testing.assert_allclose(total[off], 1.0, atol=1e-14)
    assert total[g.dc_index] == 0


def test_poisson_symbol_by_subordination():
    # exp(-2 t sqrt(S)) = t / (2 sqrt(pi)) int_0^inf exp(-4 v S) exp(-t^2 / (4 v)) v^{-3/2} dv
    g = TorusGrid(2, 64)
    S = g.sin2()
    t = 0.7
    sym = symbol("poisson", g, t=t).values
    rng = np.random.default_rng(0)
    for j in rng.integers(0, 64, (20, 2)):
        s_ = S[tuple(j)]
        val = quad(lambda v: np.exp(-4 * v * s_ - t * t / (4 * v)) * v ** -1.5, 0, np.inf,
                   epsabs=1e-14, epsrel=1e-12, limit=400)[0] * t / (2 * np.sqrt(np.pi))
        assert abs(val - sym[tuple(j)]) <= 1e-8


def test_heat_symbol_path_matches_evolve():
    from latticeharm.heat import evolve
    rng = np.random.default_rng(6)
    for dim in (1, 2):
        f = LatticeSequence.random(dim, 3, rng)
        a = evolve(f, 0.8, radius=3)
        b = apply_multiplier(f, symbol("heat", default_grid(dim, 3), t=0.8))
        assert lp_norm(a - b, np.inf) <= 1e-8


def test_multiplier_norm_bound():
    rng = np.random.default_rng(2)
    g = TorusGrid(1, 64)
    sym = symbol("poisson", g, t=0.3)
    bound = np.abs(sym.values).max()
    for _ in range(20):
        f = LatticeSequence.random(1, 5, rng)
        out = idft(sym.values * dft(f, g), g, 31)
        assert lp_norm(out, 2) <= bound * lp_norm(f, 2) * (1 + 1e-12)


def test_imaginary_power_is_isometry_on_mean_zero():
    rng = np.random.default_rng(3)
    g = TorusGrid(2, 32)
    f = mean_zero(LatticeSequence.random(2, 3, rng))
    sym = symbol("imaginary_power", g, gamma=1.3)
    F = dft(f, g)
    assert l2_norm_torus(sym.values * F) == pytest.approx(l2_norm_torus(F), rel=1e-12)
    mod = np.abs(sym.values)
    mod[g.dc_index] = 1.0
    np.testing.assert_allclose(mod, 1.0, atol=1e-14)


def test_laplace_multiplier_known_densities():
    lam = np.array([0.0, 0.01, 0.5, 3.0, 12.0])
    # a = 1 gives M(x) = 1 for x > 0
    M = laplace_multiplier_values(lam, lambda t: np.ones_like(t))
    np.testing.assert_allclose(M.real, [0, 1, 1, 1, 1], atol=1e-12)
    # a(t) = exp(-t) gives x / (x + 1)
    M = laplace_multiplier_values(lam, lambda t: np.exp(-t))
    np.testing.assert_allclose(M.real, lam / (lam + 1), atol=1e-11)
    # imaginary power density gives x^{i gamma}
    M = laplace_multiplier_values(lam[1:], imaginary_power_density(0.8))
    np.testing.assert_allclose(M, lam[1:] ** 0.8j, atol=1e-9)


def test_real_symbol_gives_real_output():
    f = LatticeSequence.random(1, 4, np.random.default_rng(4))
    out = apply_multiplier(f, symbol("heat", default_grid(1, 4), t=0.5))
    assert not np.iscomplexobj(out.values)


def test_mean_zero():
    f = LatticeSequence.random(2, 2, np.random.default_rng(5))
    assert abs(mean_zero(f).total()) < 1e-12

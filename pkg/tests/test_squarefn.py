import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from latticeharm.lattice import DomainError, LatticeSequence
from latticeharm.spectral import mean_zero
from latticeharm.squarefn import (TimeGridQuadrature, gk, gk_lp_ratio, gk_poisson,
                                  imaginary_power_apply, l2_identity_constant, l2_identity_ratio,
                                  laplace_multiplier_apply, multiplier_domination_ratio,
                                  poisson_heat_domination_ratio)


def sample(dim, radius, seed):
    return mean_zero(LatticeSequence.random(dim, radius, np.random.default_rng(seed)))


def test_identity_constants():
    assert l2_identity_constant(1) == 0.25
    assert l2_identity_constant(2) == 0.375
    assert l2_identity_constant(3) == pytest.approx(120 / 64, rel=1e-15)


def test_zero_input_gives_zero():
    z = LatticeSequence.zeros(2, 3)
    assert np.all(gk(z, 1).values == 0)
    assert np.all(gk_poisson(z, 1, points=64).values == 0)
    with pytest.raises(DomainError):
        l2_identity_ratio(z, 1)


@pytest.mark.parametrize("k,kind", [(1, "heat"), (2, "heat"), (1, "poisson"), (2, "poisson")])
def test_l2_identity_on_mean_zero_data(k, kind):
    f = sample(1, 4, k)
    r = l2_identity_ratio(f, k, kind, path="spectral", points=4096)
    assert r == pytest.approx(l2_identity_constant(k), rel=1e-5)


def test_kernel_and_torus_paths_agree():
    f = sample(1, 4, 0)
    a = gk(f, 1, radius=8)
    b = gk(f, 1, radius=8, path="spectral")
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)


def test_time_grid_refinement():
    f = sample(2, 2, 1)
    tq = TimeGridQuadrature()
    a = gk(f, 1, tq, radius=4)
    b = gk(f, 1, tq.refined(), radius=4)
    assert np.abs(a.values - b.values).max() <= 1e-6 * a.values.max()
    assert tq.refined().nodes().size == 2 * tq.nodes().size - 1


def test_poisson_dominated_by_heat():
    for seed in range(5):
        f = sample(1, 4, seed)
        assert poisson_heat_domination_ratio(f, points=4096) <= math.sqrt(2)


def test_constant_density_removes_the_mean():
    # a = 1 gives M(x) = 1 away from 0, M(0) = 0
    f = LatticeSequence.random(1, 4, np.random.default_rng(2))
    M = 64
    out = laplace_multiplier_apply(f, lambda t: np.ones_like(t), points=M)
    np.testing.assert_allclose(out.values, f.values - f.total() / M, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.floats(-2.0, 2.0).filter(lambda g: abs(g) > 1e-3), st.integers(0, 2 ** 32 - 1))
def test_laplace_density_reproduces_imaginary_power(g, seed):
    # a(t) = t^{-i g} / Gamma(1 - i g) gives M(x) = x^{i g}
    f = sample(1, 3, seed)
    c = gamma(1 - 1j * g)
    x = laplace_multiplier_apply(f, lambda t: t ** (-1j * g) / c, bound=1 / abs(c), points=256)
    y = imaginary_power_apply(f, g, points=256)
    np.testing.assert_allclose(x.values, y.values, atol=1e-8)


def test_multiplier_domination_bounded():
    f = sample(1, 4, 3)
    r = multiplier_domination_ratio(f, lambda t: np.exp(-t), points=1024)
    assert 0 < r < 10


def test_lp_ratio_at_p_two():
    f = sample(2, 2, 4)
    assert gk_lp_ratio(f, 1, 2.0, radius=30) == pytest.approx(0.5, rel=1e-4)


def test_domain_errors():
    f = sample(1, 2, 5)
    with pytest.raises(DomainError):
        gk(f, 0)
    with pytest.raises(DomainError):
        gk(f, 1.5)
    with pytest.raises(DomainError):
        gk(f, 1, path="fft")
    with pytest.raises(DomainError):
        TimeGridQuadrature(10.0, 1.0)
    with pytest.raises(DomainError):
        TimeGridQuadrature(per_decade=0)
    with pytest.raises(DomainError):
        laplace_multiplier_apply(f, lambda t: 2 * np.ones_like(t), bound=1.0)
    with pytest.raises(DomainError):
        l2_identity_ratio(f, 1, "wave", path="spectral")

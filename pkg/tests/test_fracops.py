import math

import numpy as np
import pytest
from scipy import integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from levyleblond.errors import ConstraintError, ZeroModeError
from levyleblond.fracops import (
    FracParams,
    bochner_symbol,
    delta_kernel,
    delta_kernel_field,
    eulerian_inverse_symbol,
    frac_laplacian,
    frac_laplacian_bochner,
    frac_laplacian_inverse,
    frac_laplacian_pow,
    power_table,
    riesz_transform,
)
from levyleblond.lattice import LatticeField, LatticeSpec, dirac_h, laplace_h
from levyleblond.spectral import convolve_h, d_squared_table

from conftest import random_field


def test_params_validation():
    p = FracParams(0.5, math.pi / 4)
    assert p.beta == 2.0
    assert p.rotation == pytest.approx(complex(math.sqrt(0.5), math.sqrt(0.5)))
    cases = [((0.0,), "alpha_range"), ((1.5,), "alpha_range"), ((0.5, 1.0), "theta_bound"), ((0.5, 0.1, 3.0), "beta_alpha")]
    for args, name in cases:
        with pytest.raises(ConstraintError) as err:
            FracParams(*args)
        assert err.value.constraint == name
    FracParams(0.5, -math.pi / 4)


def test_power_table_zero_mode():
    s = LatticeSpec(1, 8, 1.0)
    assert power_table(s, 0.5)[0] == 0
    assert power_table(s, 0)[0] == 1
    assert power_table(s, 0.5)[4] == pytest.approx(2.0)


def test_sigma_one_is_minus_laplacian(rng):
    s = LatticeSpec(2, 8, 0.5)
    f = random_field(s, rng, blades=[0, 2])
    assert frac_laplacian(1.0, f).distance(laplace_h(f) * -1) < 1e-11
    with pytest.raises(ConstraintError):
        frac_laplacian(1.5, f)


def test_half_power_squared_is_laplacian(rng):
    s = LatticeSpec(1, 16, 1.0)
    f = random_field(s, rng)
    half = frac_laplacian(0.5, frac_laplacian(0.5, f))
    assert half.distance(laplace_h(f) * -1) < 1e-12


def test_bochner_symbol_against_mpmath():
    # direct quadrature of the subordination integral
    for sigma, lam in ((0.25, 0.7), (0.5, 3.0), (0.75, 10.0)):
        # s = e^u on [-40, 8]; beyond the ends the integrand is -lam e^((1-sigma) u) and -e^(-sigma u)
        val = sum(
            integrate.quad(lambda u: math.exp(-sigma * u) * math.expm1(-lam * math.exp(u)), a, b, epsabs=0, epsrel=1e-13)[0]
            for a, b in ((-40, -5), (-5, 0), (0, 3), (3, 8))
        )
        val -= lam * math.exp(-40 * (1 - sigma)) / (1 - sigma) + math.exp(-8 * sigma) / sigma
        ref = val / math.gamma(-sigma)
        assert bochner_symbol(sigma, lam) == pytest.approx(ref, rel=1e-9)
        assert ref == pytest.approx(lam**sigma, rel=1e-12)
    assert bochner_symbol(0.5, 0.0) == 0.0


def test_bochner_operator_matches_spectral(rng):
    s = LatticeSpec(2, 8, 1.0)
    f = random_field(s, rng, blades=[0, 4])
    for sigma in (0.25, 0.5, 0.75):
        a, b = frac_laplacian_bochner(sigma, f), frac_laplacian(sigma, f)
        assert a.distance(b) / b.max_norm() < 1e-8


def test_eulerian_inverse_symbol():
    d2 = np.array([0.1, 1.0, 7.5])
    for sigma in (0.25, 0.5, 0.75):
        assert np.allclose(eulerian_inverse_symbol(sigma, d2), d2**-sigma, rtol=1e-9)
    with pytest.raises(ConstraintError):
        eulerian_inverse_symbol(0.5, np.array([0.0, 1.0]))


def test_inverse_needs_mean_zero(rng):
    s = LatticeSpec(1, 8, 1.0)
    with pytest.raises(ZeroModeError):
        frac_laplacian_inverse(0.5, random_field(s, rng))
    fm = random_field(s, rng, mean_zero=True)
    assert frac_laplacian_inverse(0.5, frac_laplacian(0.5, fm)).distance(fm) < 1e-12


def test_riesz_transform(rng):
    s = LatticeSpec(2, 8, 1.0)
    f = random_field(s, rng, blades=[0])
    r = riesz_transform(0.5, f)
    # D_h^2 = -Delta_h, so applying the transform twice removes only the mean
    rr = riesz_transform(0.5, r).compact(1e-13)
    fm = LatticeField(s, f.blades, f.data - f.mean())
    assert rr.with_blades([0]).distance(fm) < 1e-12
    assert riesz_transform(0.5, LatticeField.constant(s, 3.0)).max_norm() < 1e-12
    assert riesz_transform(0.0, f).distance(dirac_h(f)) < 1e-14


def test_delta_kernel_reproduces_power(rng):
    s = LatticeSpec(2, 4, 0.5)
    f = random_field(s, rng, blades=[0, 2])
    for sigma in (0.1, 0.3, 0.45):
        assert convolve_h(delta_kernel_field(sigma, s), f).distance(frac_laplacian_pow(sigma, f)) < 1e-10
    assert delta_kernel(0.3, (1, 0), (0, 3), s) == pytest.approx(delta_kernel_field(0.3, s).component(0)[1, 1])
    with pytest.raises(ConstraintError):
        delta_kernel(0.5, (0, 0), (0, 0), s)


def test_delta_kernel_is_real_and_even():
    s = LatticeSpec(1, 16, 1.0)
    k = delta_kernel_field(0.3, s).component(0)
    assert np.max(np.abs(k.imag)) < 1e-15
    assert np.allclose(k[1:], k[1:][::-1])


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.integers(0, 2**32 - 1))
def test_power_semigroup_law(a, b, seed):
    rng = np.random.default_rng(seed)
    s = LatticeSpec(1, 8, 0.5)
    f = random_field(s, rng, mean_zero=True)
    lhs = frac_laplacian_pow(a, frac_laplacian_pow(b, f))
    scale = max(1.0, float(np.max(d_squared_table(s))) ** max(a + b, a, b, 0)) / min(
        1.0, float(np.min(d_squared_table(s)[d_squared_table(s) > 0])) ** max(-min(a, b, a + b), 0)
    )
    assert lhs.distance(frac_laplacian_pow(a + b, f)) < 1e-12 * scale * (1 + f.max_norm())


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.0), st.integers(0, 2**32 - 1))
def test_power_is_positive(sigma, seed):
    rng = np.random.default_rng(seed)
    s = LatticeSpec(1, 8, 1.0)
    f = random_field(s, rng)
    inner = np.vdot(f.component(0), frac_laplacian_pow(sigma, f).component(0))
    assert inner.real >= -1e-12 and abs(inner.imag) < 1e-10

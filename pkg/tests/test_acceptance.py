"""End-to-end acceptance checks, one test per criterion.

The conftest hook prints a PASS/FAIL line per test after the run.
"""
import itertools
import math

import numpy as np
import pytest

from levyleblond.clifford import Multivector, dagger, geometric_product, norm, witt_pair
from levyleblond.fracalc import (
    RLOrder,
    TimeGrid,
    bessel_i,
    bessel_i_series,
    laplace_identity_check,
    rl_derivative_exp,
)
from levyleblond.fracops import (
    FracParams,
    bochner_symbol,
    delta_kernel_field,
    delta_kernel_table,
    frac_laplacian_bochner,
    frac_laplacian_inverse,
    frac_laplacian_pow,
)
from levyleblond.lattice import LatticeField, LatticeSpec, dirac_h, laplace_h
from levyleblond.leblond import (
    DiracVariant,
    WittDecomposition,
    apply_variant,
    leray_projection,
    levy_leblond_components,
    levy_leblond_solution,
    squared_target,
    teodorescu,
    verify_coupled_system_space,
    verify_coupled_system_time,
)
from levyleblond.semigroup import (
    evolve,
    evolve_path,
    heat_kernel,
    verify_space_fractional_cauchy,
    verify_time_fractional_cauchy,
)
from levyleblond.spectral import (
    apply_multiplier,
    convolve_h,
    d_squared_table,
    dirac_multiplier,
    laplacian_multiplier,
    parseval_check,
    z_symbol_table,
)

from conftest import random_field

ALPHAS = (1.0, 0.75, 0.5, 1 / 3)


def alpha_theta_grid():
    for a in ALPHAS:
        for th in (0.0, a * math.pi / 2, -a * math.pi / 2):
            yield a, th


def mv_err(a: Multivector, b: Multivector) -> float:
    keys = set(a.coeffs) | set(b.coeffs)
    return max((abs(a.coeffs.get(k, 0) - b.coeffs.get(k, 0)) for k in keys), default=0.0)


def random_mv(n, rng, terms=5):
    blades = rng.integers(0, 1 << (2 * n + 2), size=terms)
    return Multivector(n, {int(b): complex(rng.normal(), rng.normal()) for b in blades})


def spatial_blades(n):
    return [b for b in range(1 << (2 * n + 2)) if not b & (1 | (1 << (2 * n + 1)))]


def test_criterion_01_clifford_relations(rng):
    for n in range(1, 5):
        g = [Multivector.generator(n, j) for j in range(2 * n + 2)]
        one, zero = Multivector.scalar(n, 1), Multivector(n)
        for j, k in itertools.product(range(2 * n + 2), repeat=2):
            eta = 0 if j != k else (-2 if j <= n else 2)
            assert mv_err(g[j] * g[k] + g[k] * g[j], one * eta) == 0.0
        f, fd = witt_pair(n)
        exact = [
            (f * f, zero),
            (fd * fd, zero),
            (f * fd + fd * f, one),
            (dagger(fd), f),
            (dagger(f), fd),
            (dagger(f * fd), f * fd),
            ((f * fd) * (f * fd), f * fd),
            ((fd * f) * (fd * f), fd * f),
            ((f * fd) * (fd * f), zero),
        ]
        for j in range(1, 2 * n + 1):
            exact += [(g[j] * f + f * g[j], zero), (g[j] * fd + fd * g[j], zero)]
        for j in range(2 * n + 2):
            exact.append((dagger(g[j]), -g[j] if j <= n else g[j]))
        for lhs, rhs in exact:
            assert mv_err(lhs, rhs) == 0.0
        assert norm(Multivector(n, {(1 << (2 * n + 2)) - 1: 1})) == 1.0
        worst = 0.0
        for _ in range(100):
            a, b, c = (random_mv(n, rng) for _ in range(3))
            worst = max(worst, mv_err(geometric_product(a * b, c), geometric_product(a, b * c)))
        assert worst < 1e-12


def test_criterion_02_factorization(rng):
    specs = [LatticeSpec(n, N, h) for n in (1, 2, 3) for N in (4, 8) for h in (0.5, 1.0, 2.0)]
    worst = 0.0
    for i in range(50):
        s = specs[i % len(specs)]
        blades = rng.choice(spatial_blades(s.n), size=3, replace=False)
        f = random_field(s, rng, blades=[int(b) for b in blades])
        worst = max(worst, (dirac_h(dirac_h(f)) + laplace_h(f)).max_norm())
    assert worst < 1e-12


@pytest.mark.parametrize("spec", [LatticeSpec(1, 16, 1.0), LatticeSpec(2, 8, 0.5), LatticeSpec(3, 8, 1.0)], ids=str)
def test_criterion_03_spectral_consistency(spec, rng):
    f = random_field(spec, rng, blades=[0, 2, 1 << (spec.n + 1)])
    g = random_field(spec, rng, blades=[0, 4])
    assert dirac_h(f).distance(apply_multiplier(dirac_multiplier(spec), f)) < 1e-12
    assert laplace_h(f).distance(apply_multiplier(laplacian_multiplier(spec), f)) < 1e-12
    z = z_symbol_table(spec)
    zz = z.pointwise_product(z)
    assert set(zz.compact(1e-12).blades) <= {0}
    assert np.max(np.abs(zz.component(0) - d_squared_table(spec))) < 1e-12
    mom, lat = parseval_check(f, g)
    assert mv_err(mom, lat) < 1e-12


def test_criterion_04_fractional_powers(rng):
    spec = LatticeSpec(2, 8, 1.0)
    d2 = d_squared_table(spec)
    pos = d2 > 0
    f = random_field(spec, rng, blades=[0, 2])
    for s in (0.25, 0.5, 0.75):
        rel = np.max(np.abs(bochner_symbol(s, d2[pos]) - d2[pos] ** s) / d2[pos] ** s)
        assert rel < 1e-6
        spectral = frac_laplacian_pow(s, f)
        assert frac_laplacian_bochner(s, f).distance(spectral) / spectral.max_norm() < 1e-6
    for a, b in ((0.25, 0.5), (0.5, 0.5), (0.3, 0.7), (0.75, 1.25)):
        assert frac_laplacian_pow(a, frac_laplacian_pow(b, f)).distance(frac_laplacian_pow(a + b, f)) < 1e-10
    fm = random_field(spec, rng, blades=[0, 2], mean_zero=True)
    for s in (0.25, 0.5, 0.75):
        assert frac_laplacian_pow(s, frac_laplacian_inverse(s, fm)).distance(fm) < 1e-10


@pytest.mark.parametrize("spec", [LatticeSpec(1, 16, 1.0), LatticeSpec(2, 8, 0.5)], ids=str)
def test_criterion_05_bessel_kernel(spec):
    delta = LatticeField.delta(spec)
    for t in (0.1, 0.5, 1.0):
        for th in (0.0, math.pi / 4, -math.pi / 4, math.pi / 2, -math.pi / 2):
            K = heat_kernel(t, th, spec)
            spectral = evolve(FracParams(1.0, th), t, delta) / spec.volume_element
            assert K.field.distance(spectral) < 1e-8
            assert abs(K.mass() - 1) < 1e-10
    K0 = heat_kernel(0.0, 0.0, spec)
    assert np.array_equal(K0.values, delta.component(0) / spec.volume_element)


def test_criterion_06_cauchy_dual_solver():
    spec = LatticeSpec(1, 16, 1.0)
    f0 = LatticeField.gaussian(spec, 2.0)
    params = FracParams(0.5, math.pi / 4)
    res = []
    for dt in (0.02, 0.01, 0.005):
        r = verify_space_fractional_cauchy(params, f0, TimeGrid(0.0, dt, int(round(1 / dt)) + 1))
        assert r.passed, r.table()
        res.append(r.residuals["pde_residual"])
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert min(orders) > 3.5, orders
    for a, th in alpha_theta_grid():
        r = verify_time_fractional_cauchy(FracParams(a, th), f0, tol=1e-6)
        assert r.residuals["symbol_relative"] < 1e-6
        assert r.residuals["field_relative"] < 1e-6


def _coupled_data(params, spec, grid):
    phi0 = LatticeField.gaussian(spec, 2.0 * spec.h)
    phi2 = LatticeField.gaussian(spec, 1.5 * spec.h, value=Multivector.generator(spec.n, 1))
    return levy_leblond_components(params, phi0, phi2, grid)


def _responding(report, baseline, jump=1e-4):
    return {k for k, v in report.residuals.items() if v - baseline.residuals[k] > jump}


def test_criterion_07_coupled_systems():
    spec = LatticeSpec(1, 16, 1.0)
    grid = TimeGrid(0.0, 0.01, 41)
    params = FracParams(0.75, math.pi / 6)
    d = _coupled_data(params, spec, grid)
    space = verify_coupled_system_space(params, d, grid, tol=1e-5)
    time = verify_coupled_system_time(params, d, grid, tol=1e-4)
    assert space.passed, space.table()
    assert time.passed, time.table()

    # a bump evolved by the same semigroup, so every Fourier mode stays exponential
    bump = LatticeField.gaussian(spec, 1.0, value=Multivector.generator(1, 1) * 1e-2)
    bump_path = evolve_path(params, grid, bump)
    heat_form = {"heat_psi0", "heat_psi2", "constraint_psi1", "constraint_psi3"}
    expected = {1: {"constraint_psi1"}, 2: {"constraint_psi3"}, 3: {"constraint_psi3"}}
    for m, eqs in expected.items():
        pert = d.replace(m, d.components[m] + bump_path)
        r = verify_coupled_system_space(params, pert, grid, tol=1e-5)
        assert _responding(r, space) & heat_form == eqs, (m, r.table())
        r = verify_coupled_system_time(params, pert, grid, tol=1e-4)
        assert _responding(r, time) & heat_form == eqs, (m, r.table())
    # a spatially constant drift is invisible to D_h, so only the heat equation of that component moves
    ramp = (1e-2 * grid.times)[:, None, None] * np.ones((1,) + spec.shape + (1,))
    drift = LatticeField(spec, [2], ramp)
    r = verify_coupled_system_space(params, d.replace(2, d.psi2 + drift), grid)
    assert _responding(r, space) & heat_form == {"heat_psi2"}, r.table()
    drift = LatticeField(spec, [0], ramp)
    r = verify_coupled_system_space(params, WittDecomposition(d.psi0 + drift, d.psi1, d.psi2, d.psi3 - drift), grid)
    assert _responding(r, space) & heat_form == {"heat_psi0"}, r.table()


@pytest.mark.parametrize("alpha,theta", list(alpha_theta_grid()))
def test_criterion_08_levy_leblond_end_to_end(alpha, theta):
    spec = LatticeSpec(1, 16, 1.0)
    grid = TimeGrid(0.0, 0.005, 41)
    params = FracParams(alpha, theta)
    phi0 = LatticeField.gaussian(spec, 2.0)
    phi2 = LatticeField.gaussian(spec, 1.5, value=Multivector.generator(1, 1))
    psi = levy_leblond_solution(params, phi0, phi2, grid)
    space = apply_variant(DiracVariant("space_fractional", params), psi, grid)
    time = apply_variant(DiracVariant("time_fractional", params), psi, grid)
    assert space.max_norm() < 1e-5
    assert time.max_norm() < 1e-4
    f, fd = witt_pair(1)
    init = (fd * f) * phi0 + fd * phi2
    expected = init - f * (dirac_h(init) * params.rotation)
    assert np.array_equal(psi.index_batch(0).data, expected.with_blades(psi.blades).data)


def test_criterion_09_projections_and_variant(rng):
    spec = LatticeSpec(1, 16, 1.0)
    grid = TimeGrid(0.0, 0.01, 41)
    params = FracParams(0.5, math.pi / 5)
    # a path that does not solve the variant's heat equation, so the squared target is not ~0
    path = evolve_path(FracParams(0.6, -0.2), grid, random_field(spec, rng, blades=[0, 2], mean_zero=True))
    var = DiracVariant("space_fractional_variant", params)
    target = squared_target(var, path, grid)
    assert target.max_norm() > 1e-1
    assert apply_variant(var, apply_variant(var, path, grid), grid).distance(target) < 1e-5
    plain = apply_variant(DiracVariant("space_fractional", params), path, grid)
    assert apply_variant(var, path, grid).distance(frac_laplacian_pow((params.alpha - 1) / 2, plain)) < 1e-9

    f = random_field(spec, rng, blades=[0, 2, 4])
    fm = LatticeField(spec, f.blades, f.data - f.mean())
    assert dirac_h(teodorescu(fm)).distance(fm) < 1e-10
    P = leray_projection(f)
    const = LatticeField.constant(spec, f.mean_multivector())
    assert leray_projection(P).distance(P) < 1e-12
    assert dirac_h(P).max_norm() < 1e-12
    assert leray_projection(const).distance(const) < 1e-12
    assert leray_projection(dirac_h(const)).max_norm() < 1e-12
    assert P.distance(const) < 1e-12

    for s in (LatticeSpec(1, 16, 1.0), LatticeSpec(2, 8, 0.5)):
        torus_delta = -np.ones(s.shape) / s.sites
        torus_delta[(0,) * s.n] += 1
        torus_delta /= s.volume_element
        dist = [np.max(np.abs(delta_kernel_table(sig, s) - torus_delta)) for sig in (0.2, 0.05, 0.01)]
        assert dist[0] > dist[1] > dist[2]
        assert dist[2] < 0.15
        g = random_field(s, rng, blades=[0])
        assert convolve_h(delta_kernel_field(0.3, s), g).distance(frac_laplacian_pow(0.3, g)) < 1e-10


def test_criterion_10_special_functions():
    worst = 0.0
    for beta in (1.0, 1.25, 4 / 3, 1.5, 2.0, 2.5, 3.0, 4.5):
        for lam in (0.5, 1.0, 2.0, 0.3 + 0.4j, 1 + 1j, 5 - 2j, 10.0):
            val = rl_derivative_exp(RLOrder(beta), lam)
            ref = complex(lam) ** beta
            worst = max(worst, abs(val - ref) / abs(ref))
    assert worst < 1e-8
    for nu, lam in ((1, 1), (2, 3), (0.7, 1 + 1j), (0.3, 2 - 0.5j), (0.5, 0.2)):
        q, a = laplace_identity_check(nu, lam)
        assert abs(q - a) / abs(a) < 1e-8
    for k in range(0, 6):
        for z in (0.5, 2.0, 4.0, 3j, 2 + 2j, -3.5 + 1j, 4 * np.exp(2.5j)):
            a, b = bessel_i(k, z), bessel_i_series(k, z)
            assert abs(a - b) / abs(b) < 1e-10, (k, z)

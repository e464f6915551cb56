"""Verification suites run by ``lll verify``.

Each suite returns a list of :class:`~levyleblond.reports.ResidualReport`
objects. Random data comes from a seeded generator so runs are reproducible.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import Multivector, dagger, geometric_product, norm, witt_pair
from .fracalc import (
    RLOrder,
    TimeGrid,
    bessel_i,
    bessel_i_series,
    laplace_identity_check,
    rl_derivative_exp,
)
from .fracops import (
    FracParams,
    bochner_symbol,
    delta_kernel_field,
    frac_laplacian_inverse,
    frac_laplacian_pow,
)
from .lattice import LatticeField, LatticeSpec, dirac_h, laplace_h
from .leblond import (
    VARIANTS,
    DiracVariant,
    apply_variant,
    leray_projection,
    levy_leblond_components,
    levy_leblond_solution,
    squared_target,
    teodorescu,
    verify_coupled_system_space,
    verify_coupled_system_time,
)
from .reports import ResidualReport
from .semigroup import (
    evolve,
    evolve_path,
    heat_kernel,
    verify_space_fractional_cauchy,
    verify_time_fractional_cauchy,
)
from .spectral import (
    apply_multiplier,
    convolve_h,
    convolve_h_spectral,
    d_squared_table,
    dirac_multiplier,
    forward_dft,
    forward_dft_direct,
    inverse_dft,
    laplacian_multiplier,
    parseval_check,
    z_symbol_table,
)

SUITES = ("algebra", "spectral", "fractional", "semigroup", "theorems", "projections")


@dataclass
class VerifyConfig:
    """Inputs shared by all suites.

    ``tolerances`` keys: ``algebra`` (exact identities), ``fd`` (finite
    differences in time) and ``quad`` (quadrature-based checks).
    """

    spec: LatticeSpec = field(default_factory=lambda: LatticeSpec(1, 16, 1.0))
    params: FracParams = field(default_factory=lambda: FracParams(0.5, math.pi / 4))
    grid: TimeGrid = field(default_factory=lambda: TimeGrid(0.0, 0.01, 101))
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: {"algebra": 1e-12, "fd": 1e-5, "quad": 1e-6})

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def tol(self, key: str) -> float:
        return float(self.tolerances[key])


def random_field(spec: LatticeSpec, rng: np.random.Generator, blades=None, mean_zero: bool = False) -> LatticeField:
    """Complex Gaussian coefficients on the given blades (default: all spatial ones)."""
    if blades is None:
        blades = [b for b in range(1 << (2 * spec.n + 2)) if not b & (1 | (1 << (2 * spec.n + 1)))]
    shape = spec.shape + (len(blades),)
    f = LatticeField(spec, blades, rng.normal(size=shape) + 1j * rng.normal(size=shape))
    if mean_zero:
        f = LatticeField(spec, f.blades, f.data - f.mean())
    return f


def _mv_err(a: Multivector, b: Multivector) -> float:
    keys = set(a.coeffs) | set(b.coeffs)
    return max((abs(a.coeffs.get(k, 0) - b.coeffs.get(k, 0)) for k in keys), default=0.0)


def _random_mv(n: int, rng: np.random.Generator, terms: int = 4) -> Multivector:
    blades = rng.integers(0, 1 << (2 * n + 2), size=terms)
    return Multivector(n, {int(b): complex(rng.normal(), rng.normal()) for b in blades})


# suites

def suite_algebra(cfg: VerifyConfig) -> list[ResidualReport]:
    """Generator relations, Witt-pair identities, dagger and norm for n = 1..4."""
    tol = cfg.tol("algebra")
    rng = cfg.rng()
    out = []
    for n in range(1, 5):
        r = ResidualReport(f"clifford_n{n}", metadata={"n": n})
        g = [Multivector.generator(n, j) for j in range(2 * n + 2)]
        one = Multivector.scalar(n, 1)
        rel = 0.0
        for j, k in itertools.product(range(2 * n + 2), repeat=2):
            eta = 0 if j != k else (-2 if j <= n else 2)
            rel = max(rel, _mv_err(g[j] * g[k] + g[k] * g[j], one * eta))
        r.add("anticommutation_table", rel, tol)
        f, fd = witt_pair(n)
        zero = Multivector(n)
        r.add("f_squared", _mv_err(f * f, zero), tol)
        r.add("fd_squared", _mv_err(fd * fd, zero), tol)
        r.add("f_fd_plus_fd_f", _mv_err(f * fd + fd * f, one), tol)
        graded = max(_mv_err(g[j] * w + w * g[j], zero) for j in range(1, 2 * n + 1) for w in (f, fd))
        r.add("spatial_anticommutes_with_witt", graded, tol)
        p, q = f * fd, fd * f
        r.add("idempotent_f_fd", _mv_err(p * p, p), tol)
        r.add("idempotent_fd_f", _mv_err(q * q, q), tol)
        r.add("idempotents_orthogonal", _mv_err(p * q, zero), tol)
        r.add("dagger_of_fd", _mv_err(dagger(fd), f), tol)
        r.add("dagger_of_f_fd", _mv_err(dagger(p), p), tol)
        anti = 0.0
        for _ in range(20):
            a, b = _random_mv(n, rng), _random_mv(n, rng)
            anti = max(anti, _mv_err(dagger(a * b), dagger(b) * dagger(a)), _mv_err(dagger(dagger(a)), a))
        r.add("dagger_antiautomorphism", anti, tol)
        r.add("unit_blade_norms", max(abs(norm(Multivector(n, {b: 1})) - 1) for b in range(1 << (2 * n + 2))), tol)
        if n <= 3:
            assoc = 0.0
            for _ in range(100):
                a, b, c = (_random_mv(n, rng) for _ in range(3))
                assoc = max(assoc, _mv_err(geometric_product(a * b, c), geometric_product(a, b * c)))
            r.add("associativity_100_triples", assoc, tol)
        out.append(r)
    return out


def suite_spectral(cfg: VerifyConfig) -> list[ResidualReport]:
    """Factorisation, stencil versus symbol, Parseval, transforms and convolution."""
    tol = cfg.tol("algebra")
    rng = cfg.rng()
    out = []
    specs = [LatticeSpec(n, N, h) for n in (1, 2, 3) for N in (4, 8) for h in (0.5, 1.0)]
    r = ResidualReport("factorization", metadata={"fields": 50})
    worst = 0.0
    for i in range(50):
        s = specs[i % len(specs)]
        f = random_field(s, rng, blades=[0, 2, 1 << (s.n + 1)])
        worst = max(worst, (dirac_h(dirac_h(f)) + laplace_h(f)).max_norm())
    r.add("dirac_squared_plus_laplace", worst, tol)
    out.append(r)

    spec = cfg.spec
    r = ResidualReport("spectral_consistency", metadata={"lattice": vars_of(spec)})
    f, g = random_field(spec, rng), random_field(spec, rng)
    r.add("dirac_stencil_vs_symbol", dirac_h(f).distance(apply_multiplier(dirac_multiplier(spec), f)), tol)
    r.add("laplace_stencil_vs_symbol", laplace_h(f).distance(apply_multiplier(laplacian_multiplier(spec), f)), tol)
    z = z_symbol_table(spec)
    zz = z.pointwise_product(z)
    d2 = LatticeField.from_scalar(spec, d_squared_table(spec))
    r.add("z_squared_minus_d_squared", float(np.max(np.abs(zz.with_blades(zz.blades).component(0) - d2.component(0)))), tol)
    mom, lat = parseval_check(f, g)
    r.add("parseval", _mv_err(mom, lat), tol)
    r.add("inverse_roundtrip", inverse_dft(forward_dft(f)).distance(f), tol)
    if spec.sites <= 2048:
        r.add("fast_vs_direct_transform", forward_dft(f).distance(forward_dft_direct(f)), tol)
    if spec.sites <= 256:
        a = random_field(spec, rng, blades=[0, 2])
        b = random_field(spec, rng, blades=[0, 4])
        r.add("convolution_direct_vs_spectral", convolve_h(a, b).distance(convolve_h_spectral(a, b)), tol)
    out.append(r)
    return out


def vars_of(spec: LatticeSpec) -> dict:
    return {"n": spec.n, "N": spec.N, "h": spec.h}


def suite_fractional(cfg: VerifyConfig) -> list[ResidualReport]:
    """Fractional powers, Bochner and Eulerian representations and scalar special functions."""
    rng = cfg.rng()
    spec = cfg.spec
    quad = cfg.tol("quad")
    out = []
    r = ResidualReport("fractional_powers", metadata={"lattice": vars_of(spec)})
    d2 = d_squared_table(spec)
    pos = d2 > 0
    for s in (0.25, 0.5, 0.75):
        rel = np.max(np.abs(bochner_symbol(s, d2[pos]) - d2[pos] ** s) / d2[pos] ** s)
        r.add(f"bochner_vs_symbol_sigma_{s}", rel, quad)
    f = random_field(spec, rng, blades=[0, 2])
    fm = random_field(spec, rng, blades=[0, 2], mean_zero=True)
    law = max(
        frac_laplacian_pow(a, frac_laplacian_pow(b, f)).distance(frac_laplacian_pow(a + b, f))
        for a, b in ((0.25, 0.5), (0.5, 0.5), (0.3, 0.7))
    )
    r.add("power_semigroup_law", law, 1e-10)
    inv = max(
        frac_laplacian_pow(s, frac_laplacian_inverse(s, fm)).distance(fm) for s in (0.25, 0.5, 1.0)
    )
    r.add("inverse_then_power", inv, 1e-10)
    r.add("power_sigma_1_vs_stencil", frac_laplacian_pow(1.0, f).distance(laplace_h(f) * -1), cfg.tol("algebra"))
    if spec.sites <= 256:
        k = delta_kernel_field(0.3, spec)
        r.add("delta_kernel_convolution", convolve_h(k, f).distance(frac_laplacian_pow(0.3, f)), 1e-10)
    out.append(r)

    r = ResidualReport("special_functions")
    worst = 0.0
    for beta in (1.0, 1.25, 1.5, 2.0, 2.5, 3.0):
        for lam in (1.0, 2.0, 0.3 + 0.4j, 1 + 1j, 5 - 2j):
            val = rl_derivative_exp(RLOrder(beta), lam)
            worst = max(worst, abs(val - complex(lam) ** beta) / abs(complex(lam) ** beta))
    r.add("rl_exp_vs_principal_power", worst, 1e-8)
    worst = 0.0
    for nu, lam in ((1, 1), (2, 3), (0.7, 1 + 1j), (0.3, 2 - 0.5j)):
        q, a = laplace_identity_check(nu, lam)
        worst = max(worst, abs(q - a) / abs(a))
    r.add("laplace_identity", worst, 1e-8)
    worst = 0.0
    for k in range(0, 6):
        for z in (0.5, 2.0, 4.0, 3j, 2 + 2j, -3.5 + 1j):
            a, b = bessel_i(k, z), bessel_i_series(k, z)
            worst = max(worst, abs(a - b) / abs(b))
    r.add("bessel_integral_vs_series", worst, 1e-10)
    gen = abs(sum(bessel_i(k, 2.0) for k in range(-30, 31)) - math.exp(2)) / math.exp(2)
    r.add("bessel_generating_sum", gen, 1e-10)
    out.append(r)
    return out


def suite_semigroup(cfg: VerifyConfig) -> list[ResidualReport]:
    """Bessel kernel versus spectral path, Cauchy residuals and semigroup law."""
    spec = cfg.spec
    out = []
    r = ResidualReport("heat_kernel", metadata={"lattice": vars_of(spec)})
    delta = LatticeField.delta(spec)
    worst = mass = 0.0
    for t in (0.1, 0.5, 1.0):
        for th in (0.0, math.pi / 4, -math.pi / 4, math.pi / 2, -math.pi / 2):
            K = heat_kernel(t, th, spec)
            worst = max(worst, K.field.distance(evolve(FracParams(1.0, th), t, delta) / spec.volume_element))
            mass = max(mass, abs(K.mass() - 1))
    r.add("bessel_vs_spectral", worst, 1e-8)
    r.add("kernel_mass", mass, 1e-10)
    K0 = heat_kernel(0.0, 0.0, spec)
    r.add("kernel_at_t0_is_delta", float(np.max(np.abs(K0.values - delta.component(0) / spec.volume_element))), 0.0)
    out.append(r)

    rng = cfg.rng()
    f0 = LatticeField.gaussian(spec, 2.0 * spec.h)
    out.append(verify_space_fractional_cauchy(cfg.params, f0, cfg.grid, cfg.tol("fd")))
    out.append(verify_time_fractional_cauchy(cfg.params, f0, times=(0.0, 0.5, 1.0), tol=cfg.tol("quad")))
    r = ResidualReport("semigroup_law", metadata={"alpha": cfg.params.alpha, "theta": cfg.params.theta})
    f = random_field(spec, rng, blades=[0, 2])
    law = evolve(cfg.params, 0.3, evolve(cfg.params, 0.2, f)).distance(evolve(cfg.params, 0.5, f))
    r.add("evolve_t_after_s", law, cfg.tol("algebra"))
    sym = np.max(np.abs(np.exp(-0.7 * cfg.params.rotation * d_squared_table(spec) ** cfg.params.alpha)))
    r.add("symbol_magnitude_excess", max(sym - 1, 0.0), 0.0)
    out.append(r)
    return out


def suite_theorems(cfg: VerifyConfig) -> list[ResidualReport]:
    """Null solutions of both fractional operators built from the semigroup."""
    spec, p, grid = cfg.spec, cfg.params, cfg.grid
    phi0 = LatticeField.gaussian(spec, 2.0 * spec.h)
    phi2 = LatticeField.gaussian(spec, 1.5 * spec.h, value=Multivector.generator(spec.n, 1))
    d = levy_leblond_components(p, phi0, phi2, grid)
    out = [
        verify_coupled_system_space(p, d, grid, cfg.tol("fd")),
        verify_coupled_system_time(p, d, grid, tol=10 * cfg.tol("fd")),
    ]
    r = ResidualReport("levy_leblond_solution", metadata={"alpha": p.alpha, "theta": p.theta})
    psi = levy_leblond_solution(p, phi0, phi2, grid)
    r.add("joined_components_vs_solution", psi.distance(d.join()), cfg.tol("algebra"))
    f, fd = witt_pair(spec.n)
    init = (fd * f) * phi0 + fd * phi2
    expected = init - f * (dirac_h(init) * p.rotation)
    r.add("initial_datum_bitwise", 0.0 if np.array_equal(psi.index_batch(0).data, expected.data) else 1.0, 0.0)
    out.append(r)
    return out


def suite_projections(cfg: VerifyConfig) -> list[ResidualReport]:
    """Teodorescu operator, Helmholtz-Leray projection and the variant operator."""
    rng = cfg.rng()
    spec, p, grid = cfg.spec, cfg.params, cfg.grid
    tol = cfg.tol("algebra")
    out = []
    r = ResidualReport("projections", metadata={"lattice": vars_of(spec)})
    f = random_field(spec, rng, blades=[0, 2, 6 if spec.n > 1 else 4])
    fm = LatticeField(spec, f.blades, f.data - f.mean())
    r.add("dirac_after_teodorescu", dirac_h(teodorescu(fm)).distance(fm), 1e-10)
    P = leray_projection(f)
    r.add("projection_idempotent", leray_projection(P).distance(P), tol)
    r.add("dirac_after_projection", dirac_h(P).max_norm(), tol)
    c = LatticeField.constant(spec, f.mean_multivector())
    r.add("projection_fixes_constants", leray_projection(c).distance(c), tol)
    r.add("projection_onto_mean", P.distance(c), tol)
    out.append(r)

    r = ResidualReport("variant_operator", metadata={"alpha": p.alpha, "theta": p.theta})
    other = FracParams(0.6, -0.2) if (p.alpha, p.theta) != (0.6, -0.2) else FracParams(1.0, 0.1)
    short = TimeGrid(grid.t0, grid.dt, min(grid.count, 41))
    path = evolve_path(other, short, random_field(spec, rng, blades=[0, 2], mean_zero=True))
    var = DiracVariant("space_fractional_variant", p)
    lhs = apply_variant(var, apply_variant(var, path, short), short)
    r.add("variant_squared", lhs.distance(squared_target(var, path, short)), 1e-9)
    rel = apply_variant(var, path, short).distance(
        frac_laplacian_pow((p.alpha - 1) / 2, apply_variant(DiracVariant("space_fractional", p), path, short))
    )
    r.add("variant_interrelation", rel, 1e-9)
    for tag in VARIANTS[:3]:
        if tag == "semidiscrete" and p.alpha != 1:
            continue
        v = DiracVariant(tag, p)
        sq = apply_variant(v, apply_variant(v, path, short), short)
        r.add(f"{tag}_squared", sq.distance(squared_target(v, path, short)), 1e-9)
    if p.alpha < 1:
        sf = DiracVariant("space_fractional", p)
        a = apply_variant(sf, path, short, method="bochner")
        b = apply_variant(sf, path, short)
        r.add("bochner_vs_spectral_operator", a.distance(b) / max(b.max_norm(), 1e-300), cfg.tol("quad"))
    out.append(r)
    return out


SUITE_FUNCS = {
    "algebra": suite_algebra,
    "spectral": suite_spectral,
    "fractional": suite_fractional,
    "semigroup": suite_semigroup,
    "theorems": suite_theorems,
    "projections": suite_projections,
}


def run_suite(name: str, cfg: VerifyConfig) -> list[ResidualReport]:
    """Run one suite or ``"all"``."""
    if name == "all":
        return [r for s in SUITES for r in SUITE_FUNCS[s](cfg)]
    if name not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
    return SUITE_FUNCS[name](cfg)

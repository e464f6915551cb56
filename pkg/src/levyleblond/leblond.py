"""Semidiscrete Dirac operators of Levy-Leblond type and their null solutions.

Fields are split along the Witt basis as
``Psi = Psi0 + f Psi1 + fd Psi2 + f fd Psi3`` with every ``Psi_m`` valued in
the subalgebra generated by ``e_1 .. e_2n`` (no ``e_0`` or ``e_{2n+1}``).
Paths over a :class:`~levyleblond.fracalc.TimeGrid` are lattice fields with
one leading batch axis indexed by time.
"""
from __future__ import annotations

import cmath
import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .clifford import witt_pair
from ._core import blade_sign
from .errors import ConstraintError, DecompositionError
from .fracalc import RLOrder, TailModel, TimeGrid
from .fracops import FracParams, frac_laplacian_bochner, frac_laplacian_pow
from .lattice import LatticeField, dirac_h
from .reports import ResidualReport, _plain
from .semigroup import evolve_path, rl_derivative_modal, rl_derivative_path, time_derivative
from .spectral import check_zero_mode

VARIANTS = ("semidiscrete", "time_fractional", "space_fractional", "space_fractional_variant")
# pseudoinverse without the zero-mode check; used where the data may carry a mean
_NO_CHECK = np.inf


# Witt decomposition

def _witt_masks(n: int) -> tuple[int, int]:
    return 1, 1 << (2 * n + 1)


def spatial_mask(n: int) -> int:
    """Bit mask of the generators ``e_1 .. e_2n``."""
    return ((1 << (2 * n + 2)) - 1) & ~(1 | (1 << (2 * n + 1)))


def require_spatial(f: LatticeField, what: str = "field", tol: float = 0.0) -> None:
    """Raise :class:`DecompositionError` if ``f`` has ``e_0`` or ``e_{2n+1}`` content."""
    mask = spatial_mask(f.spec.n)
    for j, b in enumerate(f.blades):
        if b & ~mask and np.max(np.abs(f.data[..., j]), initial=0.0) > tol:
            raise DecompositionError(f"{what} has content on blade {b:#b} outside the e_1..e_2n subalgebra")


@dataclass(frozen=True)
class WittDecomposition:
    """Components ``(Psi0, Psi1, Psi2, Psi3)`` along ``1, f, fd, f fd``."""

    psi0: LatticeField
    psi1: LatticeField
    psi2: LatticeField
    psi3: LatticeField

    def __post_init__(self):
        specs = {c.spec for c in self.components}
        if len(specs) != 1:
            raise DecompositionError("components live on different lattices")
        for m, c in enumerate(self.components):
            require_spatial(c, f"component {m}")

    @property
    def components(self) -> tuple[LatticeField, ...]:
        return (self.psi0, self.psi1, self.psi2, self.psi3)

    @property
    def spec(self):
        return self.psi0.spec

    def join(self) -> LatticeField:
        return witt_join(self)

    def replace(self, m: int, field: LatticeField) -> "WittDecomposition":
        comps = list(self.components)
        comps[m] = field
        return WittDecomposition(*comps)


def witt_split(f: LatticeField) -> WittDecomposition:
    """Decompose any field along ``1, f, fd, f fd``.

    Every blade factors uniquely as ``e_c e_A`` with ``c`` a subset of
    ``{0, 2n+1}`` and ``A`` spatial, so the split is defined on the whole
    algebra. Writing ``Psi = sum_c e_c A_c`` the components are
    ``Psi0 = A_1 - A_{0,top}``, ``Psi1 = A_0 + A_top``, ``Psi2 = A_top - A_0``
    and ``Psi3 = 2 A_{0,top}``.
    """
    n = f.spec.n
    lo, top = _witt_masks(n)
    mask = spatial_mask(n)
    parts: dict[int, dict[int, np.ndarray]] = {0: {}, lo: {}, top: {}, lo | top: {}}
    for j, b in enumerate(f.blades):
        c, a = b & ~mask, b & mask
        # e_b = s e_c e_A
        s = blade_sign(c, a, n)
        bucket = parts[c]
        bucket[a] = bucket.get(a, 0) + s * f.data[..., j]
    zero = np.zeros(f.data.shape[:-1], dtype=np.complex128)

    def comb(*terms):
        out: dict[int, np.ndarray] = {}
        for coef, c in terms:
            for a, arr in parts[c].items():
                out[a] = out.get(a, zero) + coef * arr
        if not out:
            out = {0: zero}
        blades = sorted(out)
        return LatticeField(f.spec, blades, np.stack([out[a] for a in blades], axis=-1))

    return WittDecomposition(
        comb((1, 0), (-1, lo | top)),
        comb((1, lo), (1, top)),
        comb((1, top), (-1, lo)),
        comb((2, lo | top)),
    )


def witt_join(d: WittDecomposition) -> LatticeField:
    """``Psi0 + f Psi1 + fd Psi2 + f fd Psi3`` by left Clifford multiplication."""
    f, fd = witt_pair(d.spec.n)
    return d.psi0 + f * d.psi1 + fd * d.psi2 + (f * fd) * d.psi3


# operators

@dataclass(frozen=True)
class DiracVariant:
    """One of the four Levy-Leblond type operators.

    Parameters
    ----------
    tag : str
        ``"semidiscrete"``: ``D_h + f d_t + fd e^{-i theta}``.
        ``"time_fractional"``: ``D_h - f e^{i theta (1-beta)} D_t^beta + fd e^{-i theta}``.
        ``"space_fractional"``: ``D_h + f (-Delta_h)^{1-alpha} d_t + fd e^{-i theta}``.
        ``"space_fractional_variant"``: ``(-Delta_h)^{(alpha-1)/2} D_h
        + f (-Delta_h)^{(1-alpha)/2} d_t + fd e^{-i theta} (-Delta_h)^{(alpha-1)/2}``.
    params : FracParams
        ``alpha`` must be 1 for ``"semidiscrete"``; ``beta = 1/alpha`` drives
        the time-fractional operator.
    """

    tag: str
    params: FracParams

    def __post_init__(self):
        if self.tag not in VARIANTS:
            raise ValueError(f"unknown operator {self.tag!r}; expected one of {VARIANTS}")
        if self.tag == "semidiscrete" and self.params.alpha != 1:
            raise ConstraintError("the semidiscrete operator has alpha = 1", "alpha_range")

    @property
    def theta(self) -> float:
        return self.params.theta


def _check_path(path: LatticeField, grid: TimeGrid) -> None:
    if path.batch_shape != (grid.count,):
        raise ValueError(f"path must have one leading time axis of length {grid.count}, got {path.batch_shape}")


def _rl(beta: float, path: LatticeField, grid: TimeGrid, tail: TailModel | None, rl_method: str) -> LatticeField:
    if rl_method == "modal":
        return rl_derivative_modal(RLOrder(beta), path, grid)[0]
    if rl_method == "sampled":
        return rl_derivative_path(RLOrder(beta), path, grid, tail or TailModel.fit())
    raise ValueError(f"unknown RL method {rl_method!r}")


def _space_power(sigma: float, f: LatticeField, method: str) -> LatticeField:
    if sigma == 0:
        return f
    if method == "bochner" and 0 < sigma < 1:
        return frac_laplacian_bochner(sigma, f)
    if method not in ("spectral", "bochner"):
        raise ValueError(f"unknown method {method!r}")
    return frac_laplacian_pow(sigma, f)


def apply_variant(
    v: DiracVariant,
    path: LatticeField,
    grid: TimeGrid,
    tail: TailModel | None = None,
    method: str = "spectral",
    rl_method: str = "modal",
) -> LatticeField:
    """Apply an operator to a time path.

    Time derivatives use fourth-order differences; ``D_t^beta`` uses the modal
    path (exact for semigroup-generated data) or the sampled path with
    ``tail``. ``method="bochner"`` realises ``(-Delta_h)^{1-alpha}`` through
    its heat-semigroup integral instead of the spectral symbol.

    Raises
    ------
    ZeroModeError
        For ``"space_fractional_variant"`` on data with a nonzero mean.
    """
    _check_path(path, grid)
    p = v.params
    f, fd = witt_pair(path.spec.n)
    mass = cmath.exp(-1j * p.theta)
    if v.tag == "semidiscrete":
        return dirac_h(path) + f * time_derivative(path, grid) + fd * (path * mass)
    if v.tag == "time_fractional":
        rl = _rl(p.beta, path, grid, tail, rl_method)
        return dirac_h(path) - f * (rl * cmath.exp(1j * p.theta * (1 - p.beta))) + fd * (path * mass)
    if v.tag == "space_fractional":
        dt = _space_power(1 - p.alpha, time_derivative(path, grid), method)
        return dirac_h(path) + f * dt + fd * (path * mass)
    check_zero_mode(path, what="(-Delta_h)^((alpha-1)/2)")
    s = (p.alpha - 1) / 2
    dpath = frac_laplacian_pow(s, dirac_h(path))
    dt = frac_laplacian_pow(-s, time_derivative(path, grid))
    return dpath + f * dt + fd * (frac_laplacian_pow(s, path) * mass)


def squared_target(v: DiracVariant, path: LatticeField, grid: TimeGrid, rl_method: str = "modal") -> LatticeField:
    """Right-hand side of the factorisation of ``v`` applied twice.

    ``e^{-i theta} d_t - Delta_h``, ``-e^{-i theta beta} D_t^beta - Delta_h``,
    ``e^{-i theta} (-Delta_h)^{1-alpha} d_t - Delta_h`` and
    ``e^{-i theta} d_t + (-Delta_h)^alpha`` respectively.
    """
    p = v.params
    mass = cmath.exp(-1j * p.theta)
    minus_lap = frac_laplacian_pow(1.0, path)
    if v.tag == "semidiscrete":
        return time_derivative(path, grid) * mass + minus_lap
    if v.tag == "time_fractional":
        return _rl(p.beta, path, grid, None, rl_method) * (-cmath.exp(-1j * p.theta * p.beta)) + minus_lap
    if v.tag == "space_fractional":
        return frac_laplacian_pow(1 - p.alpha, time_derivative(path, grid)) * mass + minus_lap
    return time_derivative(path, grid) * mass + frac_laplacian_pow(p.alpha, path)


# coupled systems

def _meta(params: FracParams, grid: TimeGrid, extra: dict | None = None) -> dict:
    meta = {
        "alpha": params.alpha,
        "theta": params.theta,
        "beta": params.beta,
        "time": {"t0": grid.t0, "dt": grid.dt, "steps": grid.count},
    }
    meta.update(extra or {})
    return meta


def _constraints(report: ResidualReport, d: WittDecomposition, params: FracParams, tol: float, skip: int) -> None:
    rot = params.rotation
    sl = slice(skip, d.psi0.batch_shape[0] - skip)
    c1 = d.psi1 + dirac_h(d.psi0) * rot
    c3 = d.psi3 - dirac_h(d.psi2) * rot + d.psi0
    report.add("constraint_psi1", c1.index_batch(sl).max_norm(), tol)
    report.add("constraint_psi3", c3.index_batch(sl).max_norm(), tol)


def _components(report: ResidualReport, op_value: LatticeField, tol: float, skip: int, prefix: str) -> None:
    sl = slice(skip, op_value.batch_shape[0] - skip)
    for name, comp in zip(("1", "f", "fd", "ffd"), witt_split(op_value).components):
        report.add(f"{prefix}_{name}", comp.index_batch(sl).max_norm(), tol)


def verify_coupled_system_space(
    params: FracParams,
    d: WittDecomposition,
    grid: TimeGrid,
    tol: float = 1e-5,
    skip: int = 0,
) -> ResidualReport:
    """Residuals of the space-fractional null-solution characterisation.

    Three equivalent sets are reported for the path ``d``:

    * ``dirac_*``: the first-order system
      ``Psi1 + e^{i theta} D_h Psi0``,
      ``d_t Psi0 - (-Delta_h)^{alpha-1} D_h Psi1``,
      ``Psi3 - e^{i theta} D_h Psi2 + Psi0`` and
      ``d_t Psi2 + (-Delta_h)^{alpha-1} (D_h Psi3 - e^{-i theta} Psi1)``;
    * ``heat_psi0``, ``heat_psi2`` and ``constraint_*``: the fractional heat
      equations for ``Psi0, Psi2`` plus the two algebraic constraints;
    * ``operator_*``: the Witt components of the operator applied to the
      joined field.

    ``(-Delta_h)^{alpha-1}`` is the pseudoinverse (zero mode sent to 0).
    ``skip`` drops that many samples at each end of the window.
    """
    for c in d.components:
        _check_path(c, grid)
    rot = params.rotation
    a = params.alpha
    sl = slice(skip, grid.count - skip)
    report = ResidualReport("coupled_system_space", metadata=_meta(params, grid, {"skip": skip}))

    def inv(f):
        return frac_laplacian_pow(a - 1, f, _NO_CHECK)

    dt0 = time_derivative(d.psi0, grid)
    dt2 = time_derivative(d.psi2, grid)
    eqs = {
        "dirac_1": d.psi1 + dirac_h(d.psi0) * rot,
        "dirac_f": dt0 - inv(dirac_h(d.psi1)),
        "dirac_fd": d.psi3 - dirac_h(d.psi2) * rot + d.psi0,
        "dirac_ffd": dt2 + inv(dirac_h(d.psi3) - d.psi1 * (1 / rot)),
    }
    for k, v in eqs.items():
        report.add(k, v.index_batch(sl).max_norm(), tol)
    report.add("heat_psi0", (dt0 + frac_laplacian_pow(a, d.psi0) * rot).index_batch(sl).max_norm(), tol)
    report.add("heat_psi2", (dt2 + frac_laplacian_pow(a, d.psi2) * rot).index_batch(sl).max_norm(), tol)
    _constraints(report, d, params, tol, skip)
    _components(report, apply_variant(DiracVariant("space_fractional", params), d.join(), grid), tol, skip, "operator")
    return report


def verify_coupled_system_time(
    params: FracParams,
    d: WittDecomposition,
    grid: TimeGrid,
    tail: TailModel | None = None,
    tol: float = 1e-4,
    rl_method: str = "modal",
    skip: int = 0,
) -> ResidualReport:
    """Residuals of the time-fractional null-solution characterisation.

    Same layout as :func:`verify_coupled_system_space` with
    ``(-Delta_h)^{1-alpha} d_t`` replaced by ``-e^{i theta (1-beta)} D_t^beta``:
    ``D_t^beta Psi_m = -e^{i theta beta} Delta_h Psi_m`` for ``m = 0, 2``,
    ``D_t^beta Psi0 + e^{-i theta (1-beta)} D_h Psi1`` and
    ``D_t^beta Psi2 - e^{-i theta (1-beta)} (D_h Psi3 - e^{-i theta} Psi1)``.
    """
    for c in d.components:
        _check_path(c, grid)
    rot = params.rotation
    beta = params.beta
    sl = slice(skip, grid.count - skip)
    report = ResidualReport(
        "coupled_system_time", metadata=_meta(params, grid, {"skip": skip, "rl_method": rl_method})
    )
    rl0 = _rl(beta, d.psi0, grid, tail, rl_method)
    rl2 = _rl(beta, d.psi2, grid, tail, rl_method)
    c = cmath.exp(-1j * params.theta * (1 - beta))
    eqs = {
        "dirac_1": d.psi1 + dirac_h(d.psi0) * rot,
        "dirac_f": rl0 + dirac_h(d.psi1) * c,
        "dirac_fd": d.psi3 - dirac_h(d.psi2) * rot + d.psi0,
        "dirac_ffd": rl2 - (dirac_h(d.psi3) - d.psi1 * (1 / rot)) * c,
    }
    for k, v in eqs.items():
        report.add(k, v.index_batch(sl).max_norm(), tol)
    heat = cmath.exp(1j * params.theta * beta)
    report.add("heat_psi0", (rl0 - frac_laplacian_pow(1.0, d.psi0) * heat).index_batch(sl).max_norm(), tol)
    report.add("heat_psi2", (rl2 - frac_laplacian_pow(1.0, d.psi2) * heat).index_batch(sl).max_norm(), tol)
    _constraints(report, d, params, tol, skip)
    op = apply_variant(DiracVariant("time_fractional", params), d.join(), grid, tail, rl_method=rl_method)
    _components(report, op, tol, skip, "operator")
    return report


# Levy-Leblond Cauchy problem

def initial_datum(phi0_0: LatticeField, phi0_2: LatticeField) -> LatticeField:
    """``fd f Phi0_0 + fd Phi0_2`` for spatial-valued ``Phi0_0, Phi0_2``."""
    require_spatial(phi0_0, "Phi0_0")
    require_spatial(phi0_2, "Phi0_2")
    if phi0_0.spec != phi0_2.spec:
        raise DecompositionError("initial components live on different lattices")
    f, fd = witt_pair(phi0_0.spec.n)
    return (fd * f) * phi0_0 + fd * phi0_2


def levy_leblond_solution(params: FracParams, phi0_0: LatticeField, phi0_2: LatticeField, t) -> LatticeField:
    """Null solution ``Psi = Phi - f e^{i theta} D_h Phi`` of both fractional operators.

    ``Phi`` is the semigroup evolution of ``Phi0 = fd f Phi0_0 + fd Phi0_2``.

    Parameters
    ----------
    t : float, sequence of floats or TimeGrid
        A scalar gives one field; otherwise the result carries a leading time
        axis. At ``t = 0`` the result is ``Phi0 - f e^{i theta} D_h Phi0``
        bit for bit.

    Raises
    ------
    DecompositionError
        If ``Phi0_0`` or ``Phi0_2`` has ``e_0`` or ``e_{2n+1}`` content.
    ConstraintError
        For negative times.
    """
    phi0 = initial_datum(phi0_0, phi0_2)
    scalar = np.ndim(t) == 0 and not isinstance(t, TimeGrid)
    phi = evolve_path(params, [t] if scalar else t, phi0)
    f, _ = witt_pair(phi0.spec.n)
    psi = phi - f * (dirac_h(phi) * params.rotation)
    return psi.index_batch(0) if scalar else psi


def levy_leblond_components(params: FracParams, phi0_0: LatticeField, phi0_2: LatticeField, t) -> WittDecomposition:
    """Witt components of :func:`levy_leblond_solution` computed directly.

    ``Psi0 = Phi0``, ``Psi1 = -e^{i theta} D_h Phi0``, ``Psi2 = Phi2`` and
    ``Psi3 = e^{i theta} D_h Phi2 - Phi0`` with ``Phi0, Phi2`` the evolved
    initial components.
    """
    require_spatial(phi0_0, "Phi0_0")
    require_spatial(phi0_2, "Phi0_2")
    scalar = np.ndim(t) == 0 and not isinstance(t, TimeGrid)
    times = [t] if scalar else t
    p0 = evolve_path(params, times, phi0_0)
    p2 = evolve_path(params, times, phi0_2)
    rot = params.rotation
    d = WittDecomposition(p0, dirac_h(p0) * (-rot), p2, dirac_h(p2) * rot - p0)
    if scalar:
        d = WittDecomposition(*(c.index_batch(0) for c in d.components))
    return d


# Teodorescu operator and Helmholtz-Leray projection

def teodorescu(f: LatticeField) -> LatticeField:
    """``T_h = D_h (-Delta_h)^{-1}``, a right inverse of ``D_h`` on mean-zero fields.

    Raises
    ------
    ZeroModeError
        If ``f`` has a nonzero mean.
    """
    return dirac_h(frac_laplacian_pow(-1.0, f))


def leray_projection(f: LatticeField) -> LatticeField:
    """``P_h = I - D_h (-Delta_h)^{-1} D_h``.

    On the torus this keeps the mean of ``f`` and removes everything else,
    i.e. it projects onto the constants, which form the kernel of ``D_h``.
    """
    # D_h f is mean-zero up to rounding, so the pseudoinverse needs no check
    return f - dirac_h(frac_laplacian_pow(-1.0, dirac_h(f), _NO_CHECK))


# reports

def report_json(report: ResidualReport, variant: str | None = None, **kwargs) -> str:
    """Serialise a residual report with the operator tag and parameters at top level."""
    body = report.to_dict()
    meta = body["metadata"]
    body = {
        "variant": variant or report.name,
        "params": {k: meta.get(k) for k in ("alpha", "theta", "beta")},
        "residuals": {row["check"]: row["residual"] for row in body["checks"]},
        "tolerances": {row["check"]: row["tolerance"] for row in body["checks"] if row["tolerance"] is not None},
        "passed": body["passed"],
        "grid": {k: v for k, v in meta.items() if k not in ("alpha", "theta", "beta")},
    }
    return json.dumps(_plain(body), **kwargs)


def sweep_csv(reports: Iterable[ResidualReport]) -> str:
    """One CSV row per report: name, parameters, worst residual, pass flag, then every residual."""
    reports = list(reports)
    keys: list[str] = []
    for r in reports:
        keys.extend(k for k in r.residuals if k not in keys)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "alpha", "theta", "beta", "max_residual", "passed", *keys])
    for r in reports:
        m = r.metadata
        worst = max(r.residuals.values(), default=0.0)
        w.writerow(
            [r.name, m.get("alpha"), m.get("theta"), m.get("beta"), f"{worst:.6e}", r.passed]
            + [f"{r.residuals[k]:.6e}" if k in r.residuals else "" for k in keys]
        )
    return buf.getvalue()

"""The analytic semigroup ``exp(-t e^{i theta} (-Delta_h)^alpha)`` and its Cauchy problems.

Two independent routes are provided for ``alpha = 1``: the spectral path
(multiply each Fourier mode by ``exp(-t e^{i theta} d_h^2)``) and a
position-space kernel built from modified Bessel functions. For
``alpha < 1`` only the spectral path exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstraintError
from .fracalc import RLOrder, TailModel, TimeGrid, bessel_i, fd_derivative, rl_derivative_exp, rl_derivative_sampled
from .fracops import FracParams, frac_laplacian_pow, power_table
from .lattice import LatticeField, LatticeSpec, laplace_h
from .reports import ResidualReport
from .spectral import SpectralField, convolve_h, d_squared_table, forward_dft, inverse_dft


def _times(t) -> np.ndarray:
    if isinstance(t, TimeGrid):
        return t.times
    return np.atleast_1d(np.asarray(t, dtype=float))


class SemigroupEvaluator:
    """Spectral evaluator for one lattice and one parameter set.

    Parameters
    ----------
    spec : LatticeSpec
    params : FracParams
    """

    def __init__(self, spec: LatticeSpec, params: FracParams):
        self.spec = spec
        self.params = params
        lam = params.rotation * power_table(spec, params.alpha)
        lam.flags.writeable = False
        self.rates = lam  # e^{i theta} (d^2)^alpha on the momentum grid

    def symbol(self, t: float) -> np.ndarray:
        """``exp(-t e^{i theta} (d^2)^alpha)``; magnitude at most 1 for ``t >= 0``."""
        if t < 0:
            raise ConstraintError("the semigroup is only defined for t >= 0", "t_nonnegative")
        return np.exp(-t * self.rates)

    def evolve(self, t: float, f0: LatticeField) -> LatticeField:
        """Field at time ``t``; ``t == 0`` returns ``f0`` itself."""
        if f0.spec != self.spec:
            raise ValueError("field lives on a different lattice")
        if t < 0:
            raise ConstraintError("the semigroup is only defined for t >= 0", "t_nonnegative")
        if t == 0:
            return f0
        F = forward_dft(f0)
        return inverse_dft(SpectralField(self.spec, F.blades, F.data * self.symbol(t)[..., None]))

    def evolve_path(self, times, f0: LatticeField) -> LatticeField:
        """Fields at every time in ``times`` stacked on a new leading axis."""
        ts = _times(times)
        if np.any(ts < 0):
            raise ConstraintError("the semigroup is only defined for t >= 0", "t_nonnegative")
        if f0.batch_shape:
            raise ValueError("initial data must be unbatched")
        F = forward_dft(f0)
        sym = np.exp(-np.multiply.outer(ts, self.rates))
        out = inverse_dft(SpectralField(self.spec, F.blades, sym[..., None] * F.data)).data.copy()
        out[ts == 0] = f0.data
        return LatticeField(self.spec, f0.blades, out)


def evolve(params: FracParams, t: float, f0: LatticeField) -> LatticeField:
    """``exp(-t e^{i theta} (-Delta_h)^alpha) f0`` by the spectral path."""
    return SemigroupEvaluator(f0.spec, params).evolve(t, f0)


def evolve_path(params: FracParams, times, f0: LatticeField) -> LatticeField:
    """Spectral evolution at several times (leading batch axis)."""
    return SemigroupEvaluator(f0.spec, params).evolve_path(times, f0)


# Bessel kernel (alpha = 1)

def _periodized_bessel_row(z: complex, N: int, tol: float = 1e-18) -> np.ndarray:
    """``sum_p exp(-z) I_{m + pN}(z)`` for ``m = 0 .. N-1``."""
    if z == 0:
        row = np.zeros(N, dtype=np.complex128)
        row[0] = 1.0
        return row
    scale = np.exp(-z)
    vals = [scale * bessel_i(0, z)]
    k = 1
    # I_k decays faster than geometrically once k exceeds |z|
    while True:
        v = scale * bessel_i(k, z)
        vals.append(v)
        if k > max(N, abs(z)) and abs(v) < tol:
            break
        k += 1
    row = np.zeros(N, dtype=np.complex128)
    for k, v in enumerate(vals):
        row[k % N] += v
        if k:
            row[(-k) % N] += v  # I_{-k} = I_k
    return row


@dataclass(frozen=True)
class HeatKernel:
    """Kernel ``K(x, t e^{i theta})`` of ``exp(t e^{i theta} Delta_h)`` on the torus.

    ``values`` is indexed by site offset modulo ``N`` along each axis.
    """

    spec: LatticeSpec
    t: float
    theta: float
    values: np.ndarray

    @property
    def field(self) -> LatticeField:
        return LatticeField.from_scalar(self.spec, self.values)

    def mass(self) -> complex:
        """``sum_x h^n K(x)``."""
        return complex(np.sum(self.values) * self.spec.volume_element)

    def at(self, offset: Sequence[int]) -> complex:
        return complex(self.values[tuple(np.mod(offset, self.spec.N))])

    def apply(self, f0: LatticeField) -> LatticeField:
        """``sum_y h^n f0(y) K(x - y)`` by direct summation."""
        return convolve_h(self.field, f0)

    def table(self) -> list[tuple]:
        """Rows ``(offset..., re, im)`` with offsets folded into ``(-N/2, N/2]``."""
        offs = self.spec.signed_offsets().reshape(-1, self.spec.n)
        vals = self.values.reshape(-1)
        rows = [tuple(int(o) for o in off) + (float(v.real), float(v.imag)) for off, v in zip(offs, vals)]
        return sorted(rows)


def heat_kernel(t: float, theta: float, spec: LatticeSpec) -> HeatKernel:
    """Bessel-product kernel of the rotated heat semigroup (``alpha = 1``).

    ``K(x) = h^-n prod_j exp(-z) I_{x_j/h}(z)`` with ``z = 2 t e^{i theta} / h^2``,
    summed over periodic images so that it is the kernel on the torus.
    """
    if t < 0:
        raise ConstraintError("the semigroup is only defined for t >= 0", "t_nonnegative")
    if abs(theta) > math.pi / 2 + 1e-12:
        raise ConstraintError("|theta| must not exceed pi/2 for alpha = 1", "theta_bound")
    z = 2 * t * complex(math.cos(theta), math.sin(theta)) / spec.h**2
    if z != 0 and abs(np.angle(z)) >= math.pi:
        raise ConstraintError("argument of the Bessel kernel leaves the slit plane", "bessel_arg")
    row = _periodized_bessel_row(z, spec.N)
    K = row
    for _ in range(spec.n - 1):
        K = np.multiply.outer(K, row)
    return HeatKernel(spec, float(t), float(theta), K / spec.volume_element)


# Riemann-Liouville derivative on semigroup-generated paths

def fit_mode_rates(F: np.ndarray, dt: float, floor: float = 1e-13):
    """Fit ``c(t) = c_0 exp(-lam t)`` per column of a path (time on axis 0).

    Returns ``(lam, active, misfit)``. Columns whose peak is below ``floor``
    times the global peak are inactive. ``misfit`` is the largest deviation of
    the data from the fitted exponential relative to the global peak.
    """
    mag = np.abs(F)
    peak = float(np.max(mag, initial=0.0))
    active = np.max(mag, axis=0) > floor * max(peak, np.finfo(float).tiny)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = F[1:] / F[:-1]
        logs = np.log(ratio)
    # average the consecutive log-ratios, unwrapping the phase along time
    logs = np.where(np.isfinite(logs), logs, 0)
    imag = np.unwrap(logs.imag, axis=0)
    lam = -(np.mean(logs.real, axis=0) + 1j * np.mean(imag, axis=0)) / dt
    lam = np.where(active, lam, 0)
    steps = np.arange(F.shape[0]).reshape((-1,) + (1,) * (F.ndim - 1)) * dt
    model = F[0] * np.exp(-lam * steps)
    misfit = float(np.max(np.abs(np.where(active, model - F, 0)), initial=0.0)) / max(peak, np.finfo(float).tiny)
    return lam, active, misfit


def _unique_rl_factors(order: RLOrder, lam: np.ndarray, active: np.ndarray) -> np.ndarray:
    factors = np.zeros(lam.shape, dtype=np.complex128)
    sel = active & (np.abs(lam) > 1e-13)
    if not np.any(sel):
        return factors
    keys = np.round(lam[sel], 12)
    uniq, inv = np.unique(keys, return_inverse=True)
    factors[sel] = np.asarray(rl_derivative_exp(order, uniq)).reshape(-1)[inv.reshape(-1)]
    return factors


def rl_derivative_modal(order, path: LatticeField, grid: TimeGrid):
    """Riemann-Liouville derivative of a path whose Fourier modes are exponentials.

    Each Fourier mode and blade is fitted by ``c exp(-lam t)`` and multiplied
    by the exact factor ``rl_derivative_exp(beta, lam)``, so the semi-infinite
    tail is handled analytically. Modes with ``lam = 0`` (the constant part)
    get factor 0, the limit of ``lam^beta``.

    Returns
    -------
    (LatticeField, float)
        The derivative path and the relative misfit of the exponential model.
    """
    order = order if isinstance(order, RLOrder) else RLOrder(float(order))
    if path.batch_shape != (grid.count,):
        raise ValueError("path must carry exactly one leading time axis matching the grid")
    F = forward_dft(path)
    lam, active, misfit = fit_mode_rates(F.data, grid.dt)
    factors = _unique_rl_factors(order, lam, active)
    return inverse_dft(SpectralField(path.spec, F.blades, F.data * factors[None])), misfit


def rl_derivative_path(order, path: LatticeField, grid: TimeGrid, tail: TailModel | None = None) -> LatticeField:
    """Sampled Riemann-Liouville derivative applied site by site along the time axis."""
    res = rl_derivative_sampled(order, path.data, grid, tail)
    return LatticeField(path.spec, path.blades, res.values)


def time_derivative(path: LatticeField, grid: TimeGrid, m: int = 1) -> LatticeField:
    """Fourth-order finite-difference ``d^m/dt^m`` along the leading time axis."""
    if path.batch_shape[:1] != (grid.count,):
        raise ValueError("path must carry a leading time axis matching the grid")
    return LatticeField(path.spec, path.blades, fd_derivative(path.data, grid.dt, m))


# Cauchy-problem verifiers

def _meta(params: FracParams, spec: LatticeSpec, grid: TimeGrid | None = None) -> dict:
    meta = {
        "alpha": params.alpha,
        "theta": params.theta,
        "beta": params.beta,
        "lattice": {"n": spec.n, "N": spec.N, "h": spec.h},
    }
    if grid is not None:
        meta["time"] = {"t0": grid.t0, "dt": grid.dt, "steps": grid.count}
    return meta


def verify_space_fractional_cauchy(
    params: FracParams, f0: LatticeField, grid: TimeGrid, tol: float = 1e-5
) -> ResidualReport:
    """Residual of ``d/dt Phi = -e^{i theta} (-Delta_h)^alpha Phi`` along the evolved path.

    The time derivative uses fourth-order differences; the right-hand side is
    spectral. Reports the maximum pointwise norm over all grid times and
    sites, plus the initial-condition mismatch.
    """
    path = evolve_path(params, grid, f0)
    lhs = time_derivative(path, grid)
    rhs = frac_laplacian_pow(params.alpha, path) * (-params.rotation)
    report = ResidualReport("space_fractional_cauchy", metadata=_meta(params, f0.spec, grid))
    scale = max(rhs.max_norm(), 1.0)
    report.add("pde_residual", lhs.distance(rhs), tol)
    report.add("pde_residual_relative", lhs.distance(rhs) / scale)
    first = path.index_batch(0)
    report.add("initial_condition", first.distance(f0) if grid.t0 == 0 else 0.0, 0.0 if grid.t0 == 0 else None)
    return report


def verify_time_fractional_cauchy(
    params: FracParams,
    f0: LatticeField | None = None,
    spec: LatticeSpec | None = None,
    times: Sequence[float] = (0.0, 0.5, 1.0),
    tol: float = 1e-6,
) -> ResidualReport:
    """Mode-by-mode check of ``D_t^{1/alpha} Phi = -e^{i theta/alpha} Delta_h Phi``.

    For every grid momentum with ``d^2 > 0`` the factor
    ``rl_derivative_exp(1/alpha, e^{i theta} (d^2)^alpha)`` is compared with
    ``e^{i theta / alpha} d^2``; the zero mode satisfies ``0 = 0``. When
    ``f0`` is given, the field equation is also checked at ``times``.
    """
    spec = spec or (f0.spec if f0 is not None else None)
    if spec is None:
        raise ValueError("need a lattice spec or an initial field")
    order = RLOrder(params.beta)
    d2 = d_squared_table(spec)
    pos = d2 > 0
    lam = params.rotation * power_table(spec, params.alpha)
    factor = np.zeros(spec.shape, dtype=np.complex128)
    factor[pos] = rl_derivative_exp(order, lam[pos])
    target = np.exp(1j * params.theta * params.beta) * d2
    rel = np.max(np.abs(factor[pos] - target[pos]) / np.abs(target[pos]))
    report = ResidualReport("time_fractional_cauchy", metadata=_meta(params, spec))
    report.metadata["times"] = list(map(float, times))
    report.add("symbol_relative", rel, tol)
    if f0 is not None:
        path = evolve_path(params, times, f0)
        F = forward_dft(path)
        lhs = inverse_dft(SpectralField(spec, F.blades, F.data * factor[..., None]))
        rhs = laplace_h(path) * (-np.exp(1j * params.theta * params.beta))
        scale = max(rhs.max_norm(), 1e-300)
        report.add("field_relative", lhs.distance(rhs) / scale, tol)
    return report


def verify_time_fractional_sampled(
    params: FracParams,
    f0: LatticeField,
    grid: TimeGrid,
    tail: TailModel | None = None,
    tol: float = 1e-3,
    keep_fraction: float = 0.5,
) -> ResidualReport:
    """Physical-space check of the time-fractional problem with sampled RL derivatives.

    Coarser than :func:`verify_time_fractional_cauchy` because the semi-infinite
    time integral is truncated at the end of the window and continued by
    ``tail``; only the leading ``keep_fraction`` of the window is compared.
    The tail error decays with the distance to the window end at the rate of
    the slowest lattice mode, so the window must be several decay times long. The
    time-independent mean of ``f0`` is removed first: its derivative is 0 by
    the same convention as the modal path, while the sampled integral of a
    non-decaying signal diverges for fractional orders.
    """
    mean = LatticeField.constant(f0.spec, f0.mean_multivector())
    path = evolve_path(params, grid, f0 - mean)
    lhs = rl_derivative_path(RLOrder(params.beta), path, grid, tail or TailModel.fit())
    rhs = laplace_h(path) * (-np.exp(1j * params.theta * params.beta))
    keep = grid.times <= grid.t0 + keep_fraction * (grid.t_end - grid.t0)
    diff = (lhs - rhs).index_batch(keep)
    scale = max(rhs.index_batch(keep).max_norm(), 1e-300)
    report = ResidualReport("time_fractional_sampled", metadata=_meta(params, f0.spec, grid))
    report.metadata["keep_fraction"] = keep_fraction
    report.add("field_relative", diff.max_norm() / scale, tol)
    return report

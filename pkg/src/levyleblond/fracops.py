"""Fractional powers of the discrete Laplacian and related operators.

All operators are spectral: ``(-Delta_h)^sigma`` has symbol ``(d_h^2)^sigma``.
On the torus ``d_h(0)^2 = 0``, so negative powers are realised as
pseudoinverses (the zero mode is sent to 0) and require mean-zero input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConstraintError
from .fracalc import de_quadrature, gamma
from .lattice import LatticeField, LatticeSpec, dirac_h
from .spectral import (
    ZERO_MODE_TOL,
    Multiplier,
    SpectralField,
    apply_multiplier,
    check_zero_mode,
    d_squared_table,
    forward_dft,
    inverse_dft,
)

THETA_TOL = 1e-12


@dataclass(frozen=True)
class FracParams:
    """Validated triple ``(alpha, theta, beta)`` with ``beta = 1/alpha``.

    Parameters
    ----------
    alpha : float
        Space-fractional order in ``(0, 1]``.
    theta : float
        Rotation angle with ``|theta| <= alpha pi / 2`` (radians).
    beta : float, optional
        Time-fractional order; defaults to ``1/alpha`` and must match it.

    Raises
    ------
    ConstraintError
        With ``constraint`` set to ``"alpha_range"``, ``"theta_bound"`` or
        ``"beta_alpha"``.
    """

    alpha: float
    theta: float = 0.0
    beta: float | None = None

    def __post_init__(self):
        a, th = float(self.alpha), float(self.theta)
        if not (0 < a <= 1):
            raise ConstraintError(f"alpha must lie in (0, 1], got {a}", "alpha_range")
        if not math.isfinite(th) or abs(th) > a * math.pi / 2 + THETA_TOL:
            raise ConstraintError(f"|theta| = {abs(th)} exceeds alpha*pi/2 = {a * math.pi / 2}", "theta_bound")
        b = 1.0 / a if self.beta is None else float(self.beta)
        if abs(a * b - 1) > 1e-12:
            raise ConstraintError(f"beta must equal 1/alpha, got beta={b} for alpha={a}", "beta_alpha")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "beta", b)

    @property
    def rotation(self) -> complex:
        """``exp(i theta)``."""
        return complex(math.cos(self.theta), math.sin(self.theta))


# symbols

def power_table(spec: LatticeSpec, sigma: float) -> np.ndarray:
    """``(d_h^2)^sigma`` on the grid; 0 at the zero mode unless ``sigma == 0``."""
    return _power_table(spec, float(sigma))


@lru_cache(maxsize=128)
def _power_table(spec: LatticeSpec, sigma: float) -> np.ndarray:
    d2 = d_squared_table(spec)
    if sigma == 0:
        out = np.ones_like(d2)
    else:
        out = np.zeros_like(d2)
        pos = d2 > 0
        out[pos] = d2[pos] ** sigma
    out.flags.writeable = False
    return out


def laplacian_power(spec: LatticeSpec, sigma: float) -> Multiplier:
    """Multiplier of ``(-Delta_h)^sigma`` for any real ``sigma``."""
    return Multiplier.scalar(spec, power_table(spec, sigma), singular_at_zero=sigma < 0, name=f"(-lap)^{sigma:g}")


def frac_laplacian_pow(sigma: float, f: LatticeField, zero_tol: float = ZERO_MODE_TOL) -> LatticeField:
    """``(-Delta_h)^sigma f`` for any real ``sigma`` (pseudoinverse for ``sigma < 0``)."""
    return apply_multiplier(laplacian_power(f.spec, sigma), f, zero_tol)


def frac_laplacian(sigma: float, f: LatticeField) -> LatticeField:
    """Spectral fractional Laplacian ``(-Delta_h)^sigma`` for ``0 < sigma <= 1``."""
    if not 0 < sigma <= 1:
        raise ConstraintError(f"sigma must lie in (0, 1], got {sigma}", "sigma_range")
    return frac_laplacian_pow(sigma, f)


def bochner_symbol(sigma: float, d2, rtol: float = 1e-10):
    """``int_0^inf g_{-sigma}(s) (exp(-s d2) - 1) ds`` evaluated by quadrature.

    ``g_{-sigma}(s) = s^(-1-sigma) / Gamma(-sigma)``. Works on scalars or
    arrays of ``d2 >= 0``; zero entries give 0 exactly.
    """
    if not 0 < sigma < 1:
        raise ConstraintError(f"sigma must lie in (0, 1), got {sigma}", "sigma_range")
    d2_arr = np.asarray(d2, dtype=float)
    flat = d2_arr.reshape(-1)
    pos = flat > 0
    out = np.zeros(flat.shape)
    if np.any(pos):
        logd = np.log(flat[pos])
        g = gamma(-sigma)

        def G(u):
            # in u = log s: s^(-sigma) (exp(-s d2) - 1) / Gamma(-sigma), computed in logs
            logx = logd[None, :] + u[:, None]
            x = np.exp(np.minimum(logx, 700.0))
            logterm = np.where(logx < -30, logx - x / 2, np.log(-np.expm1(-x)))
            return -np.exp(-sigma * u[:, None] + logterm) / g

        out[pos] = de_quadrature(G, rtol=rtol).value
    out = out.reshape(d2_arr.shape)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _bochner_table(spec: LatticeSpec, sigma: float) -> np.ndarray:
    d2 = d_squared_table(spec)
    # symbols depend only on d2; evaluate once per distinct value
    vals, inv = np.unique(np.round(d2, 14), return_inverse=True)
    out = bochner_symbol(sigma, vals)[inv].reshape(d2.shape)
    out.flags.writeable = False
    return out


def frac_laplacian_bochner(sigma: float, f: LatticeField) -> LatticeField:
    """``(-Delta_h)^sigma`` through the heat-semigroup (Bochner) integral.

    Each Fourier mode is multiplied by the quadrature value of
    ``int_0^inf g_{-sigma}(s) (exp(-s d_h^2) - 1) ds``.
    """
    if not 0 < sigma < 1:
        raise ConstraintError(f"sigma must lie in (0, 1), got {sigma}", "sigma_range")
    table = _bochner_table(f.spec, float(sigma))
    return apply_multiplier(Multiplier.scalar(f.spec, table, name=f"bochner^{sigma:g}"), f)


def frac_laplacian_inverse(sigma: float, f: LatticeField, zero_tol: float = ZERO_MODE_TOL) -> LatticeField:
    """``(-Delta_h)^(-sigma)`` for ``0 < sigma <= 1`` on mean-zero fields.

    Raises
    ------
    ZeroModeError
        If ``f`` has a nonzero mean.
    """
    if not 0 < sigma <= 1:
        raise ConstraintError(f"sigma must lie in (0, 1], got {sigma}", "sigma_range")
    return frac_laplacian_pow(-sigma, f, zero_tol)


def eulerian_inverse_symbol(sigma: float, d2, rtol: float = 1e-10):
    """``int_0^inf exp(-p d2) g_sigma(p) dp`` by quadrature; equals ``d2^(-sigma)``."""
    if not 0 < sigma < 1:
        raise ConstraintError(f"sigma must lie in (0, 1), got {sigma}", "sigma_range")
    d2_arr = np.asarray(d2, dtype=float)
    if np.any(d2_arr <= 0):
        raise ConstraintError("the Eulerian integral needs d2 > 0", "zero_mode")
    flat = d2_arr.reshape(-1)
    g = gamma(sigma)

    def G(u):
        p = np.exp(np.minimum(u, 700.0))
        return np.exp(-np.outer(p, flat) + sigma * u[:, None]) / g

    out = np.asarray(de_quadrature(G, rtol=rtol).value).real.reshape(d2_arr.shape)
    return float(out) if out.ndim == 0 else out


def riesz_transform(sigma: float, f: LatticeField) -> LatticeField:
    """Fractional Riesz-type transform ``(-Delta_h)^(-sigma) D_h``.

    ``D_h`` is applied first, so constants are mapped to 0 without error;
    the symbol is ``(d_h^2)^(-sigma) z_h(xi)`` with the zero mode sent to 0.
    """
    g = dirac_h(f)
    if sigma == 0:
        return g
    # D_h g has no zero mode by construction, so the pseudoinverse is exact here
    spec = f.spec
    F = forward_dft(g)
    return inverse_dft(SpectralField(spec, F.blades, F.data * power_table(spec, -sigma)[..., None]))


def delta_kernel(sigma: float, x, y, spec: LatticeSpec) -> complex:
    """Kernel ``delta_{h,sigma}(x - y) = (2 pi)^(-n) int (d_h^2)^sigma exp(-i (x-y).xi) dxi``.

    ``x`` and ``y`` are integer site indices; the integral is the Riemann sum
    over the momentum grid. Convolution with this kernel reproduces
    ``(-Delta_h)^sigma``.
    """
    if not 0 < sigma < 0.5:
        raise ConstraintError(f"sigma must lie in (0, 1/2), got {sigma}", "sigma_range")
    return complex(delta_kernel_table(sigma, spec)[tuple(np.mod(np.subtract(x, y), spec.N))])


def delta_kernel_table(sigma: float, spec: LatticeSpec) -> np.ndarray:
    """``delta_{h,sigma}`` at every integer offset (array indexed by offset mod N)."""
    table = power_table(spec, sigma)
    # (2 pi)^(-n) * cell * sum_xi m(xi) exp(-i x.xi) = (N h)^(-n) * fftn(m)
    return np.fft.fftn(table) / (spec.N * spec.h) ** spec.n


def delta_kernel_field(sigma: float, spec: LatticeSpec) -> LatticeField:
    """``delta_{h,sigma}`` as a scalar lattice field (value at offset ``x``)."""
    return LatticeField.from_scalar(spec, delta_kernel_table(sigma, spec))

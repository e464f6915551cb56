"""Discrete Fourier transform on the periodic lattice and Fourier multipliers.

Conventions
-----------
Forward transform::

    (F f)(xi) = h^n / (2 pi)^(n/2) * sum_x f(x) exp(i x . xi)

Inverse transform, with the Brillouin-zone integral realised as a Riemann
sum over the momentum grid (cell volume ``(2 pi / (N h))^n``)::

    f(x) = (2 pi)^(-n/2) * sum_xi cell * g(xi) exp(-i x . xi)

Momenta are stored in FFT order: index ``i`` along an axis carries
``k = i`` for ``i <= N/2`` and ``k = i - N`` otherwise, with
``xi = 2 pi k / (N h)``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .clifford import Multivector, dagger_sign
from .errors import DimensionMismatchError, ZeroModeError
from .lattice import BladeArray, LatticeField, LatticeSpec

ZERO_MODE_TOL = 1e-10
DIRECT_DFT_CAP = 2048


class SpectralField(BladeArray):
    """Map from grid momenta (FFT order) to multivectors."""

    __slots__ = ()

    def zero_mode(self) -> np.ndarray:
        """Coefficients at ``xi = 0``, shape ``batch + (B,)``."""
        return self.data[(Ellipsis,) + (0,) * self.spec.n + (slice(None),)]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("LLL_THREADS", "1")))
    except ValueError:
        return 1


def forward_dft(f: LatticeField) -> SpectralField:
    """Discrete Fourier transform of a lattice field (fast path)."""
    spec = f.spec
    scale = spec.volume_element / (2 * math.pi) ** (spec.n / 2)
    # norm="forward" leaves the inverse unscaled: sum_x f(x) exp(+2 pi i x k / N)
    out = scipy.fft.ifftn(f.data, axes=f.grid_axes, norm="forward", workers=_workers())
    return SpectralField(spec, f.blades, out * scale)


def inverse_dft(g: SpectralField) -> LatticeField:
    """Inverse transform realised as a Riemann sum over the momentum grid."""
    spec = g.spec
    scale = spec.cell_volume / (2 * math.pi) ** (spec.n / 2)
    out = scipy.fft.fftn(g.data, axes=g.grid_axes, workers=_workers())
    return LatticeField(spec, g.blades, out * scale)


def _phase_matrix(spec: LatticeSpec, sign: int) -> np.ndarray:
    if spec.sites > DIRECT_DFT_CAP:
        raise ValueError(f"direct transform limited to {DIRECT_DFT_CAP} sites")
    x = spec.coordinates().reshape(-1, spec.n)
    xi = spec.momenta().reshape(-1, spec.n)
    return np.exp(sign * 1j * (xi @ x.T))  # rows: momenta, columns: sites


def forward_dft_direct(f: LatticeField) -> SpectralField:
    """Reference transform by explicit summation over all sites (O(N^(2n)))."""
    spec = f.spec
    mat = _phase_matrix(spec, +1)
    flat = f.data.reshape(f.batch_shape + (spec.sites, len(f.blades)))
    out = np.einsum("ks,...sb->...kb", mat, flat) * spec.volume_element / (2 * math.pi) ** (spec.n / 2)
    return SpectralField(spec, f.blades, out.reshape(f.data.shape))


def inverse_dft_direct(g: SpectralField) -> LatticeField:
    """Reference inverse by explicit summation over all momenta (O(N^(2n)))."""
    spec = g.spec
    mat = _phase_matrix(spec, -1)
    flat = g.data.reshape(g.batch_shape + (spec.sites, len(g.blades)))
    out = np.einsum("ks,...kb->...sb", mat, flat) * spec.cell_volume / (2 * math.pi) ** (spec.n / 2)
    return LatticeField(spec, g.blades, out.reshape(g.data.shape))


def field_dagger(f: BladeArray) -> BladeArray:
    """Pointwise dagger conjugation."""
    signs = np.array([dagger_sign(b, f.spec.n) for b in f.blades], dtype=np.float64)
    return f.map_components(lambda d: np.conj(d) * signs)


def _weighted_sum(product: BladeArray, weight: float) -> Multivector:
    total = np.sum(product.data, axis=product.grid_axes) * weight
    if total.ndim != 1:
        raise ValueError("inner products need unbatched fields")
    return Multivector(product.spec.n, dict(zip(product.blades, total)))


def lattice_inner(f: LatticeField, g: LatticeField) -> Multivector:
    """Clifford-valued form ``sum_x h^n f(x)^dagger g(x)``."""
    return _weighted_sum(field_dagger(f).pointwise_product(g), f.spec.volume_element)


def momentum_inner(F: SpectralField, G: SpectralField) -> Multivector:
    """Clifford-valued form ``int F(xi)^dagger G(xi) dxi`` as a Riemann sum on the grid."""
    return _weighted_sum(field_dagger(F).pointwise_product(G), F.spec.cell_volume)


def parseval_check(f: LatticeField, g: LatticeField) -> tuple[Multivector, Multivector]:
    """Return ``(<F f, F g>_momentum, <f, g>_lattice)``; the two agree on the torus."""
    if f.spec != g.spec:
        raise DimensionMismatchError("fields live on different lattices")
    return momentum_inner(forward_dft(f), forward_dft(g)), lattice_inner(f, g)


# symbols

def d_squared(xi, h: float) -> float:
    """Symbol ``sum_j (4/h^2) sin^2(h xi_j / 2)`` of ``-Delta_h`` at one momentum."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return float(np.sum(4.0 / h**2 * np.sin(h * xi / 2) ** 2))


def z_symbol(xi, h: float) -> Multivector:
    """Symbol of ``D_h`` at one momentum.

    ``sum_j -i e_j sin(h xi_j)/h + sum_j e_{n+j} (1 - cos(h xi_j))/h``
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n = xi.size
    coeffs = {}
    for j in range(n):
        coeffs[1 << (j + 1)] = -1j * math.sin(h * xi[j]) / h
        coeffs[1 << (n + j + 1)] = (1 - math.cos(h * xi[j])) / h
    return Multivector(n, coeffs)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=64)
def d_squared_table(spec: LatticeSpec) -> np.ndarray:
    """``d_h(xi)^2`` on the momentum grid (FFT order), read-only."""
    xi = spec.momenta()
    return _freeze(np.sum(4.0 / spec.h**2 * np.sin(spec.h * xi / 2) ** 2, axis=-1))


@lru_cache(maxsize=64)
def z_symbol_table(spec: LatticeSpec) -> SpectralField:
    """``z_h(xi)`` on the momentum grid as a spectral field with vector blades."""
    n, h = spec.n, spec.h
    xi = spec.momenta()
    comps = {}
    for j in range(n):
        comps[1 << (j + 1)] = -1j * np.sin(h * xi[..., j]) / h
        comps[1 << (n + j + 1)] = (1 - np.cos(h * xi[..., j])) / h
    return SpectralField.from_components(spec, comps)


@dataclass(frozen=True)
class Multiplier:
    """Per-momentum multivector symbol acting by left multiplication.

    Parameters
    ----------
    values : SpectralField
        Unbatched symbol table; must be finite everywhere. A singular symbol
        stores its pseudoinverse value (usually 0) at ``xi = 0``.
    singular_at_zero : bool
        Whether the underlying symbol blows up at ``xi = 0``; application then
        requires mean-zero input.
    name : str
        Label used in reports.
    """

    values: SpectralField
    singular_at_zero: bool = False
    name: str = "multiplier"

    def __post_init__(self):
        if self.values.batch_shape:
            raise ValueError("multiplier tables must be unbatched")
        if not np.all(np.isfinite(self.values.data)):
            raise ValueError("multiplier table has non-finite entries")

    @property
    def spec(self) -> LatticeSpec:
        return self.values.spec

    @property
    def is_scalar(self) -> bool:
        return self.values.blades == (0,)

    @classmethod
    def scalar(cls, spec: LatticeSpec, table, singular_at_zero: bool = False, name: str = "scalar"):
        table = np.broadcast_to(np.asarray(table, dtype=np.complex128), spec.shape)
        return cls(SpectralField.from_scalar(spec, table.copy()), singular_at_zero, name)

    @classmethod
    def identity(cls, spec: LatticeSpec):
        return cls.scalar(spec, 1.0, name="identity")

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        if not isinstance(other, Multiplier):
            return NotImplemented
        if self.is_scalar and other.is_scalar:
            vals = SpectralField(self.spec, (0,), self.values.data * other.values.data)
        else:
            vals = self.values.pointwise_product(other.values)
        return Multiplier(vals, self.singular_at_zero or other.singular_at_zero, f"{self.name}*{other.name}")


def laplacian_multiplier(spec: LatticeSpec) -> Multiplier:
    """Symbol ``-d_h(xi)^2`` of ``Delta_h``."""
    return Multiplier.scalar(spec, -d_squared_table(spec), name="laplace_h")


def dirac_multiplier(spec: LatticeSpec) -> Multiplier:
    """Symbol ``z_h(xi)`` of ``D_h``."""
    return Multiplier(z_symbol_table(spec), False, "dirac_h")


def check_zero_mode(f: LatticeField, tol: float = ZERO_MODE_TOL, what: str = "operator") -> None:
    """Raise :class:`ZeroModeError` unless ``f`` has (relatively) zero mean."""
    scale = max(float(np.max(np.abs(f.data), initial=0.0)), 1.0)
    mean = float(np.max(np.abs(f.mean()), initial=0.0))
    if mean > tol * scale:
        raise ZeroModeError(f"{what} is singular at the zero mode; input mean {mean:.3e} exceeds {tol:.1e}")


def multiply_spectral(m: Multiplier, F: SpectralField) -> SpectralField:
    """Left-multiply a spectral field by a symbol table."""
    if m.spec != F.spec:
        raise DimensionMismatchError("multiplier and field live on different lattices")
    if m.is_scalar:
        return SpectralField(F.spec, F.blades, F.data * m.values.data)
    return m.values.pointwise_product(F)


def apply_multiplier(m: Multiplier, f: LatticeField, zero_tol: float = ZERO_MODE_TOL) -> LatticeField:
    """Realise ``F^{-1} m F`` on a lattice field.

    Raises
    ------
    ZeroModeError
        If ``m`` is singular at zero and ``f`` is not mean-zero.
    """
    if m.singular_at_zero:
        check_zero_mode(f, zero_tol, m.name)
    return inverse_dft(multiply_spectral(m, forward_dft(f)))


def convolve_h(psi: LatticeField, phi: LatticeField) -> LatticeField:
    """Periodic convolution ``sum_y h^n phi(y) psi(x - y)`` by direct summation.

    ``phi(y)`` multiplies ``psi(x - y)`` from the left.
    """
    if psi.spec != phi.spec:
        raise DimensionMismatchError("fields live on different lattices")
    if psi.batch_shape or phi.batch_shape:
        raise ValueError("convolve_h expects unbatched fields")
    spec = psi.spec
    out = LatticeField.zeros(spec, psi.blades)
    for y in np.ndindex(*spec.shape):
        coeffs = phi.data[y]
        if not np.any(coeffs):
            continue
        moved = LatticeField(spec, psi.blades, np.roll(psi.data, y, axis=psi.grid_axes))
        out = out + moved.left_multiply(Multivector(spec.n, dict(zip(phi.blades, coeffs))))
    return out * spec.volume_element


def convolve_h_spectral(psi: LatticeField, phi: LatticeField) -> LatticeField:
    """Same convolution through the transform: ``F(psi * phi) = (2 pi)^(n/2) (F phi)(F psi)``."""
    spec = psi.spec
    prod = forward_dft(phi).pointwise_product(forward_dft(psi))
    return inverse_dft(prod * (2 * math.pi) ** (spec.n / 2))

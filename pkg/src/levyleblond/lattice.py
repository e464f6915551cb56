"""Clifford-valued fields on a periodic box of hZ^n and the local difference operators.

A :class:`LatticeField` stores its values densely: ``data`` has shape
``batch + (N,) * n + (B,)`` where ``B`` is the number of blades listed in
``blades``. Any leading batch axes (typically time) are carried through every
operator unchanged, so a whole time path can be processed in one call.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _core
from .clifford import Multivector
from .errors import CapExceededError, DimensionMismatchError

DENSE_CAP = 4096


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic box with ``N`` sites per axis and spacing ``h`` in ``n`` dimensions."""

    n: int
    N: int
    h: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 4, got {self.N!r}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"h must be positive and finite, got {self.h!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "h", float(self.h))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def sites(self) -> int:
        return self.N**self.n

    @property
    def volume_element(self) -> float:
        """Lattice weight ``h^n``."""
        return self.h**self.n

    @property
    def cell_volume(self) -> float:
        """Momentum-grid cell volume ``(2 pi / (N h))^n``."""
        return (2 * math.pi / (self.N * self.h)) ** self.n

    def coordinates(self) -> np.ndarray:
        """Site positions, shape ``(N,)*n + (n,)``, values in ``{0, h, ..., (N-1)h}``."""
        axes = np.meshgrid(*[np.arange(self.N) * self.h] * self.n, indexing="ij")
        return np.stack(axes, axis=-1)

    def signed_offsets(self) -> np.ndarray:
        """Integer site offsets folded into ``(-N/2, N/2]``, shape ``(N,)*n + (n,)``."""
        k = np.arange(self.N)
        k = np.where(k > self.N // 2, k - self.N, k)
        axes = np.meshgrid(*[k] * self.n, indexing="ij")
        return np.stack(axes, axis=-1)

    def momentum_indices(self) -> np.ndarray:
        """Integer momentum labels ``k`` in FFT order, in ``(-N/2, N/2]``."""
        k = np.arange(self.N)
        return np.where(k > self.N // 2, k - self.N, k)

    def momenta(self) -> np.ndarray:
        """Grid momenta ``2 pi k / (N h)``, shape ``(N,)*n + (n,)`` in FFT order."""
        xi = 2 * math.pi * self.momentum_indices() / (self.N * self.h)
        axes = np.meshgrid(*[xi] * self.n, indexing="ij")
        return np.stack(axes, axis=-1)


def _as_blades(blades: Iterable[int]) -> tuple[int, ...]:
    return tuple(int(b) for b in blades)


def _left_generator(gen: int, n: int, blades: tuple[int, ...], data: np.ndarray):
    """Left-multiply blade-expanded data by the single generator ``e_gen``."""
    g = 1 << gen
    out_blades = tuple(g ^ b for b in blades)
    signs = np.array([_core.blade_sign(g, b, n) for b in blades], dtype=np.float64)
    return out_blades, data * signs


def _left_multivector(mv: Multivector, blades: tuple[int, ...], data: np.ndarray):
    mb = np.array(list(mv.coeffs), dtype=np.int64)
    mc = np.array(list(mv.coeffs.values()), dtype=np.complex128)
    if mb.size == 0:
        return blades, np.zeros_like(data)
    signs, out_blades, index = _core.product_table(mb, np.array(blades, dtype=np.int64), mv.n)
    out = np.zeros(data.shape[:-1] + (len(out_blades),), dtype=np.complex128)
    for i in range(len(mb)):
        out[..., index[i]] += (mc[i] * signs[i]) * data
    return _as_blades(out_blades), out


def _merge(blades_a, data_a, blades_b, data_b):
    """Bring two blade-expanded arrays onto the union of their blades."""
    if blades_a == blades_b:
        return blades_a, data_a, data_b
    union = tuple(sorted(set(blades_a) | set(blades_b)))
    pos = {b: i for i, b in enumerate(union)}

    def widen(bl, d):
        out = np.zeros(d.shape[:-1] + (len(union),), dtype=np.complex128)
        out[..., [pos[b] for b in bl]] = d
        return out

    return union, widen(blades_a, data_a), widen(blades_b, data_b)


class BladeArray:
    """Shared machinery for blade-expanded arrays over an ``N^n`` grid.

    Subclasses fix the meaning of the grid (sites or momenta).
    """

    __slots__ = ("spec", "blades", "data")

    def __init__(self, spec: LatticeSpec, blades: Sequence[int], data):
        blades = _as_blades(blades)
        data = np.asarray(data, dtype=np.complex128)
        if len(set(blades)) != len(blades):
            raise ValueError("duplicate blades")
        top = 1 << (2 * spec.n + 2)
        if any(not 0 <= b < top for b in blades):
            raise ValueError("blade index outside the algebra")
        if data.ndim < spec.n + 1 or data.shape[-1] != len(blades) or data.shape[-1 - spec.n : -1] != spec.shape:
            raise ValueError(f"data shape {data.shape} does not match grid {spec.shape} with {len(blades)} blades")
        order = np.argsort(blades, kind="stable")
        if list(order) != list(range(len(blades))):
            blades = tuple(blades[i] for i in order)
            data = data[..., order]
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "blades", blades)
        object.__setattr__(self, "data", data)
        data.flags.writeable = False

    def __setattr__(self, key, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    # construction helpers
    def _new(self, blades, data):
        return type(self)(self.spec, blades, data)

    @classmethod
    def zeros(cls, spec: LatticeSpec, blades: Sequence[int] = (0,), batch: tuple[int, ...] = ()):
        return cls(spec, blades, np.zeros(tuple(batch) + spec.shape + (len(tuple(blades)),), dtype=np.complex128))

    @classmethod
    def constant(cls, spec: LatticeSpec, value, batch: tuple[int, ...] = ()):
        mv = value if isinstance(value, Multivector) else Multivector.scalar(spec.n, value)
        blades = tuple(mv.coeffs) or (0,)
        coeffs = np.array([mv.coeffs.get(b, 0) for b in blades], dtype=np.complex128)
        data = np.broadcast_to(coeffs, tuple(batch) + spec.shape + (len(blades),)).copy()
        return cls(spec, blades, data)

    @classmethod
    def from_scalar(cls, spec: LatticeSpec, values):
        values = np.asarray(values, dtype=np.complex128)
        return cls(spec, (0,), values[..., None])

    @classmethod
    def from_components(cls, spec: LatticeSpec, components: dict[int, np.ndarray]):
        """Build from a map ``blade -> array of shape batch + grid``."""
        blades = tuple(sorted(components))
        return cls(spec, blades, np.stack([np.asarray(components[b], dtype=np.complex128) for b in blades], axis=-1))

    # structure
    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.data.shape[: -1 - self.spec.n]

    @property
    def grid_axes(self) -> tuple[int, ...]:
        nd = self.data.ndim
        return tuple(range(nd - 1 - self.spec.n, nd - 1))

    def component(self, blade: int) -> np.ndarray:
        """Coefficient array of one blade (zeros if absent)."""
        if blade in self.blades:
            return self.data[..., self.blades.index(blade)]
        return np.zeros(self.data.shape[:-1], dtype=np.complex128)

    def value(self, index: Sequence[int]) -> Multivector:
        """Multivector at a grid index (batch indices first, if any)."""
        row = self.data[tuple(index)]
        if row.ndim != 1:
            raise IndexError("index must address a single grid point")
        return Multivector(self.spec.n, dict(zip(self.blades, row)))

    def with_blades(self, blades: Sequence[int]):
        """Re-express on a blade list; dropped blades must be zero."""
        blades = _as_blades(blades)
        pos = {b: i for i, b in enumerate(blades)}
        out = np.zeros(self.data.shape[:-1] + (len(blades),), dtype=np.complex128)
        for j, b in enumerate(self.blades):
            if b in pos:
                out[..., pos[b]] = self.data[..., j]
            elif np.any(self.data[..., j]):
                raise ValueError(f"blade {b:#b} carries data and cannot be dropped")
        return self._new(blades, out)

    def compact(self, tol: float = 0.0):
        """Drop blades whose coefficients are all within ``tol`` of zero."""
        keep = [j for j in range(len(self.blades)) if np.max(np.abs(self.data[..., j]), initial=0.0) > tol]
        if not keep:
            keep = [0]
        return self._new([self.blades[j] for j in keep], self.data[..., keep])

    def index_batch(self, item):
        """Select along the batch axes, e.g. ``path.index_batch(3)``."""
        if not self.batch_shape:
            raise IndexError("field has no batch axes")
        return self._new(self.blades, self.data[item])

    def map_components(self, fn: Callable[[np.ndarray], np.ndarray]):
        return self._new(self.blades, fn(self.data))

    # arithmetic
    def _binary(self, other, op):
        if not isinstance(other, BladeArray) or type(other) is not type(self):
            return NotImplemented
        if other.spec != self.spec:
            raise DimensionMismatchError("fields live on different lattices")
        blades, a, b = _merge(self.blades, self.data, other.blades, other.data)
        return self._new(blades, op(a, b))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return self._new(self.blades, -self.data)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._new(self.blades, self.data * other)
        if isinstance(other, np.ndarray):
            # batch-wise scalar weights, broadcast over grid and blades
            w = other.reshape(other.shape + (1,) * (self.spec.n + 1))
            return self._new(self.blades, self.data * w)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Multivector):
            return self.left_multiply(other)
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._new(self.blades, self.data / other)
        return NotImplemented

    def left_multiply(self, mv: Multivector):
        """Pointwise ``mv * value``."""
        if mv.n != self.spec.n:
            raise DimensionMismatchError("multivector and field dimensions differ")
        blades, data = _left_multivector(mv, self.blades, self.data)
        return self._new(blades, data)

    def pointwise_product(self, other: "BladeArray"):
        """Pointwise Clifford product ``self(x) * other(x)``; batch axes broadcast."""
        if other.spec != self.spec:
            raise DimensionMismatchError("fields live on different lattices")
        batch = np.broadcast_shapes(self.batch_shape, other.batch_shape)
        a = np.broadcast_to(self.data, batch + self.data.shape[len(self.batch_shape) :]).reshape(-1, len(self.blades))
        b = np.broadcast_to(other.data, batch + other.data.shape[len(other.batch_shape) :]).reshape(-1, len(other.blades))
        ob, out = _core.field_product(
            np.array(self.blades, dtype=np.int64), a, np.array(other.blades, dtype=np.int64), b, self.spec.n
        )
        return self._new(_as_blades(ob), out.reshape(batch + self.spec.shape + (len(ob),)))

    # norms
    def site_norms(self) -> np.ndarray:
        """Euclidean coefficient norm at each grid point (the Clifford norm)."""
        return np.sqrt(np.sum(np.abs(self.data) ** 2, axis=-1))

    def max_norm(self) -> float:
        return float(np.max(self.site_norms(), initial=0.0))

    def distance(self, other) -> float:
        """Maximum pointwise norm of the difference."""
        return (self - other).max_norm()

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return self.distance(other) <= atol

    def __repr__(self):
        names = ",".join(f"{b:#b}" for b in self.blades)
        return f"{type(self).__name__}(n={self.spec.n}, N={self.spec.N}, h={self.spec.h}, batch={self.batch_shape}, blades=[{names}])"


class LatticeField(BladeArray):
    """Map from lattice sites to multivectors (optionally with leading batch axes)."""

    __slots__ = ()

    @classmethod
    def delta(cls, spec: LatticeSpec, site: Sequence[int] | None = None, value=1.0):
        """Field equal to ``value`` at integer site ``site`` (default origin) and 0 elsewhere."""
        site = tuple(site) if site is not None else (0,) * spec.n
        mv = value if isinstance(value, Multivector) else Multivector.scalar(spec.n, value)
        blades = tuple(mv.coeffs) or (0,)
        data = np.zeros(spec.shape + (len(blades),), dtype=np.complex128)
        data[tuple(s % spec.N for s in site)] = [mv.coeffs.get(b, 0) for b in blades]
        return cls(spec, blades, data)

    @classmethod
    def gaussian(cls, spec: LatticeSpec, width: float, center: Sequence[float] | None = None, value=1.0):
        """Periodic Gaussian bump ``exp(-|x-c|^2 / (2 width^2))`` using minimum-image distances."""
        L = spec.N * spec.h
        c = np.zeros(spec.n) if center is None else np.asarray(center, dtype=float)
        d = spec.coordinates() - c
        d = (d + L / 2) % L - L / 2
        g = np.exp(-np.sum(d**2, axis=-1) / (2 * width**2))
        return cls.from_scalar(spec, g).left_multiply(
            value if isinstance(value, Multivector) else Multivector.scalar(spec.n, value)
        )

    def mean(self) -> np.ndarray:
        """Site average of the coefficients, shape ``batch + (B,)``."""
        return np.mean(self.data, axis=self.grid_axes)

    def mean_multivector(self) -> Multivector:
        if self.batch_shape:
            raise ValueError("mean_multivector needs an unbatched field")
        return Multivector(self.spec.n, dict(zip(self.blades, self.mean())))

    def total(self) -> np.ndarray:
        """Weighted lattice sum ``sum_x h^n f(x)``, shape ``batch + (B,)``."""
        return np.sum(self.data, axis=self.grid_axes) * self.spec.volume_element


def shift(f: LatticeField, axis: int, direction: int) -> LatticeField:
    """Translate values by ``direction * h`` along ``axis`` (1-based) with periodic wrap.

    The result ``g`` satisfies ``g(x) = f(x - direction * h e_axis)``.
    """
    if not 1 <= axis <= f.spec.n:
        raise ValueError(f"axis must lie in 1..{f.spec.n}, got {axis}")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    return f.map_components(lambda d: np.roll(d, direction, axis=f.grid_axes[axis - 1]))


def _neighbours(f: LatticeField, j: int):
    ax = f.grid_axes[j]
    return np.roll(f.data, -1, axis=ax), np.roll(f.data, 1, axis=ax)


def dirac_h(f: LatticeField) -> LatticeField:
    """Discrete Dirac operator with left Clifford multiplication.

    ``D_h f = sum_j e_j (f(x+he_j) - f(x-he_j)) / 2h
    + sum_j e_{n+j} (2 f(x) - f(x+he_j) - f(x-he_j)) / 2h``
    """
    n, h = f.spec.n, f.spec.h
    out = None
    for j in range(n):
        fp, fm = _neighbours(f, j)
        for gen, part in ((j + 1, (fp - fm) / (2 * h)), (n + j + 1, (2 * f.data - fp - fm) / (2 * h))):
            term = LatticeField(f.spec, *_left_generator(gen, n, f.blades, part))
            out = term if out is None else out + term
    return out


def laplace_h(f: LatticeField) -> LatticeField:
    """Second-order central difference Laplacian, applied componentwise."""
    h2 = f.spec.h**2
    acc = np.zeros_like(f.data)
    for j in range(f.spec.n):
        fp, fm = _neighbours(f, j)
        acc += fp + fm - 2 * f.data
    return f.map_components(lambda _: acc / h2)


def identity(f: LatticeField) -> LatticeField:
    return f


NAMED_OPERATORS: dict[str, Callable[[LatticeField], LatticeField]] = {
    "identity": identity,
    "laplace_h": laplace_h,
    "dirac_h": dirac_h,
}


def sector_blades(n: int, sector: str | Sequence[int] = "scalar") -> tuple[int, ...]:
    """Blade list for a named sector.

    ``"scalar"`` is ``(0,)``; ``"spatial"`` spans all blades of the generators
    ``e_1 .. e_{2n}``; ``"full"`` spans the whole algebra. A sequence is
    returned unchanged.
    """
    if not isinstance(sector, str):
        return _as_blades(sector)
    if sector == "scalar":
        return (0,)
    if sector == "spatial":
        gens = [1 << j for j in range(1, 2 * n + 1)]
        out = []
        for r in range(len(gens) + 1):
            for combo in itertools.combinations(gens, r):
                out.append(sum(combo))
        return tuple(sorted(out))
    if sector == "full":
        return tuple(range(1 << (2 * n + 2)))
    raise ValueError(f"unknown sector {sector!r}")


def dense_matrix(
    op: str | Callable[[LatticeField], LatticeField],
    spec: LatticeSpec,
    sector: str | Sequence[int] = "scalar",
    cap: int = DENSE_CAP,
) -> np.ndarray:
    """Dense matrix of a linear lattice operator on a blade sector.

    Rows and columns are ordered site-major (row-major over axes), then by
    blade within the sector.

    Raises
    ------
    CapExceededError
        If ``N^n * len(sector)`` exceeds ``cap``.
    ValueError
        If the operator maps the sector outside itself.
    """
    fn = NAMED_OPERATORS[op] if isinstance(op, str) else op
    blades = sector_blades(spec.n, sector)
    size = spec.sites * len(blades)
    if size > cap:
        raise CapExceededError(f"matrix would have {size} rows, cap is {cap}")
    # all unit fields at once as a batch
    basis = np.eye(size, dtype=np.complex128).reshape((size,) + spec.shape + (len(blades),))
    image = fn(LatticeField(spec, blades, basis)).with_blades(blades)
    return image.data.reshape(size, size).T.copy()

"""Complexified Clifford algebra Cl(n+1, n+1) on bit-pattern blades.

Generators ``e_0 .. e_n`` square to -1 and ``e_{n+1} .. e_{2n+1}`` square to
+1. A blade is the ascending product of the generators whose bits are set in
an integer, so ``0b101`` is ``e_0 e_2``. The Witt pair is built from the two
generators that sit outside the spatial block ``e_1 .. e_{2n}``::

    f  = (e_{2n+1} + e_0) / 2
    fd = (e_{2n+1} - e_0) / 2
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from . import _core
from .errors import ConsistencyError, DimensionMismatchError

EQ_TOL = 1e-14


@dataclass(frozen=True)
class Signature:
    """Metric signature of Cl(n+1, n+1).

    Parameters
    ----------
    n : int
        Spatial dimension; the algebra has ``2n + 2`` generators.
    """

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")

    @property
    def generators(self) -> int:
        return 2 * self.n + 2

    def square(self, j: int) -> int:
        """Square (+1 or -1) of generator ``e_j``."""
        if not 0 <= j < self.generators:
            raise ValueError(f"generator index {j} out of range for n={self.n}")
        return -1 if j <= self.n else 1

    def blade_sign(self, a: int, b: int) -> int:
        """Sign picked up when multiplying blade ``a`` by blade ``b``."""
        return _core.blade_sign(a, b, self.n)


def blade_grade(blade: int) -> int:
    return int(blade).bit_count()


def dagger_sign(blade: int, n: int) -> int:
    """Sign of ``e_J^dagger`` relative to ``e_J`` for a blade ``J``."""
    r = blade_grade(blade)
    low = (blade & ((1 << (n + 1)) - 1)).bit_count()
    return -1 if (r * (r - 1) // 2 + low) % 2 else 1


def blade_name(blade: int) -> str:
    if blade == 0:
        return "1"
    return "".join(f"e{j}" for j in range(blade.bit_length()) if blade >> j & 1)


class Multivector:
    """Immutable sparse element of C (x) Cl(n+1, n+1).

    Parameters
    ----------
    n : int
        Spatial dimension.
    coeffs : mapping of int to complex, optional
        Blade bit pattern to coefficient. Exact zeros are dropped.
    """

    __slots__ = ("_n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[int, complex] | None = None):
        sig = Signature(n)
        clean = {}
        top = 1 << sig.generators
        for blade, c in (coeffs or {}).items():
            blade = int(blade)
            if not 0 <= blade < top:
                raise ValueError(f"blade {blade:#b} references generators beyond e{2 * n + 1}")
            c = complex(c)
            if c != 0:
                clean[blade] = clean.get(blade, 0) + c
        object.__setattr__(self, "_n", int(n))
        object.__setattr__(self, "_coeffs", MappingProxyType({b: c for b, c in sorted(clean.items()) if c != 0}))

    def __setattr__(self, key, value):
        raise AttributeError("Multivector is immutable")

    # constructors
    @classmethod
    def scalar(cls, n: int, value: complex = 1.0) -> "Multivector":
        return cls(n, {0: value})

    @classmethod
    def generator(cls, n: int, j: int, coeff: complex = 1.0) -> "Multivector":
        Signature(n).square(j)
        return cls(n, {1 << j: coeff})

    @classmethod
    def blade(cls, n: int, indices: Iterable[int], coeff: complex = 1.0) -> "Multivector":
        """Product ``e_{i1} e_{i2} ...`` in the given (not necessarily sorted) order."""
        out = cls.scalar(n, coeff)
        for j in indices:
            out = out * cls.generator(n, j)
        return out

    @property
    def n(self) -> int:
        return self._n

    @property
    def coeffs(self) -> Mapping[int, complex]:
        return self._coeffs

    @property
    def signature(self) -> Signature:
        return Signature(self._n)

    def scalar_part(self) -> complex:
        return self._coeffs.get(0, 0j)

    def is_zero(self, tol: float = EQ_TOL) -> bool:
        return all(abs(c) <= tol for c in self._coeffs.values())

    def is_scalar(self, tol: float = EQ_TOL) -> bool:
        return all(abs(c) <= tol for b, c in self._coeffs.items() if b != 0)

    def chop(self, tol: float = EQ_TOL) -> "Multivector":
        """Drop coefficients with magnitude at most ``tol``."""
        return Multivector(self._n, {b: c for b, c in self._coeffs.items() if abs(c) > tol})

    # arithmetic
    def _check(self, other: "Multivector"):
        if other._n != self._n:
            raise DimensionMismatchError(f"dimension mismatch: n={self._n} vs n={other._n}")

    def _coerce(self, other) -> "Multivector":
        if isinstance(other, Multivector):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex)):
            return Multivector.scalar(self._n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._coeffs)
        for b, c in other._coeffs.items():
            out[b] = out.get(b, 0) + c
        return Multivector(self._n, out)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self._n, {b: -c for b, c in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, (int, float, complex)):
            return Multivector(self._n, {b: c * other for b, c in self._coeffs.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Multivector(self._n, {b: other * c for b, c in self._coeffs.items()})
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * (1.0 / other)
        return NotImplemented

    def isclose(self, other, tol: float = EQ_TOL) -> bool:
        """Coefficientwise comparison with absolute tolerance ``tol``."""
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        blades = set(self._coeffs) | set(other._coeffs)
        return all(abs(self._coeffs.get(b, 0) - other._coeffs.get(b, 0)) <= tol for b in blades)

    def __eq__(self, other):
        if not isinstance(other, (Multivector, int, float, complex)):
            return NotImplemented
        try:
            return self.isclose(other)
        except DimensionMismatchError:
            return False

    __hash__ = None

    def dagger(self) -> "Multivector":
        return dagger(self)

    def norm(self) -> float:
        return norm(self)

    def __repr__(self):
        return f"Multivector(n={self._n}, {str(self)})"

    def __str__(self):
        if not self._coeffs:
            return "0"
        terms = []
        for b, c in self._coeffs.items():
            cs = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"
            terms.append(cs if b == 0 else f"{cs}*{blade_name(b)}")
        text = " + ".join(terms)
        f, fd = witt_pair(self._n)
        for alias, w in (("f", f), ("fd", fd)):
            if self.isclose(w):
                return alias
        return text


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    """Clifford product ``ab`` computed blade by blade.

    Raises
    ------
    DimensionMismatchError
        If ``a.n != b.n``.
    """
    if a.n != b.n:
        raise DimensionMismatchError(f"dimension mismatch: n={a.n} vs n={b.n}")
    out: dict[int, complex] = {}
    n = a.n
    for ba, ca in a.coeffs.items():
        for bb, cb in b.coeffs.items():
            blade = ba ^ bb
            out[blade] = out.get(blade, 0) + _core.blade_sign(ba, bb, n) * ca * cb
    return Multivector(n, out)


def witt_pair(n: int) -> tuple[Multivector, Multivector]:
    """Return the nilpotent pair ``(f, fd)``."""
    top = 1 << (2 * n + 1)
    f = Multivector(n, {top: 0.5, 1: 0.5})
    fd = Multivector(n, {top: 0.5, 1: -0.5})
    return f, fd


def dagger(a: Multivector) -> Multivector:
    """Anti-automorphism with ``e_j -> -e_j`` (j <= n), ``e_j -> e_j`` otherwise, and conjugated scalars."""
    n = a.n
    return Multivector(n, {b: dagger_sign(b, n) * c.conjugate() for b, c in a.coeffs.items()})


def norm(a: Multivector, tol: float = 1e-12) -> float:
    """Square root of the scalar part of ``a^dagger a``.

    Raises
    ------
    ConsistencyError
        If that scalar part is negative beyond ``tol``.
    """
    n = a.n
    sq = 0.0
    for b, c in a.coeffs.items():
        # scalar part of (c e_J)^dagger (c e_J)
        sq += (dagger_sign(b, n) * _core.blade_sign(b, b, n)) * (c.conjugate() * c).real
    if sq < -tol * max(1.0, sum(abs(c) ** 2 for c in a.coeffs.values())):
        raise ConsistencyError(f"negative squared norm {sq}")
    return math.sqrt(max(sq, 0.0))

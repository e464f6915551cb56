import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyleblond.clifford import (
    Multivector,
    Signature,
    blade_grade,
    blade_name,
    dagger,
    geometric_product,
    norm,
    witt_pair,
)
from levyleblond.errors import DimensionMismatchError


def e(n, *idx, c=1.0):
    return Multivector.blade(n, idx, c)


coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@st.composite
def multivectors(draw, n=2, max_terms=4):
    blades = draw(st.lists(st.integers(0, (1 << (2 * n + 2)) - 1), min_size=0, max_size=max_terms))
    return Multivector(n, {b: draw(coeff) for b in blades})


def test_product_oracle_n3():
    # (2e1 + 3e2)(e1e2) = 2 e1e1e2 + 3 e2e1e2 = -2 e2 + 3 e1
    lhs = (e(3, 1, c=2) + e(3, 2, c=3)) * e(3, 1, 2)
    assert lhs.isclose(e(3, 1, c=3) + e(3, 2, c=-2))


def test_generator_squares():
    n = 2
    for j in range(2 * n + 2):
        sq = Multivector.generator(n, j) * Multivector.generator(n, j)
        assert sq.isclose(Multivector.scalar(n, -1 if j <= n else 1))
    assert Signature(n).square(0) == -1 and Signature(n).square(2 * n + 1) == 1


def test_witt_pair_components():
    n = 1
    f, fd = witt_pair(n)
    top = 2 * n + 1
    assert f.isclose(0.5 * (Multivector.generator(n, top) + Multivector.generator(n, 0)))
    assert fd.isclose(0.5 * (Multivector.generator(n, top) - Multivector.generator(n, 0)))
    assert str(f) == "f" and str(fd) == "fd"


def test_dagger_oracles():
    n = 2
    f, fd = witt_pair(n)
    assert dagger(dagger(fd)).isclose(fd)
    assert dagger(f * fd).isclose(f * fd)
    # conjugation of i and e_1 -> -e_1 cancel
    assert dagger(e(n, 1, c=1j)).isclose(e(n, 1, c=1j))
    assert dagger(e(n, n + 1, c=1j)).isclose(e(n, n + 1, c=-1j))


def test_norm_oracles():
    n = 2
    assert norm(e(n, 1) + e(n, n + 1, c=1j)) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert norm(Multivector(n)) == 0.0
    assert norm(Multivector.scalar(n, 3 - 4j)) == pytest.approx(5.0)


def test_blade_helpers():
    assert blade_grade(0b1011) == 3
    assert blade_name(0) == "1"
    assert blade_name(0b101) == "e0e2"


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        _ = Multivector.generator(1, 0) + Multivector.generator(2, 0)
    with pytest.raises(DimensionMismatchError):
        geometric_product(Multivector.generator(1, 0), Multivector.generator(2, 0))
    assert Multivector.generator(1, 0) != Multivector.generator(2, 0)


def test_immutable():
    a = Multivector.generator(1, 1)
    with pytest.raises(AttributeError):
        a.foo = 1


@settings(max_examples=60, deadline=None)
@given(multivectors(), multivectors(), multivectors())
def test_associative(a, b, c):
    assert ((a * b) * c).isclose(a * (b * c), tol=1e-9)


@settings(max_examples=60, deadline=None)
@given(multivectors(), multivectors(), multivectors())
def test_distributive(a, b, c):
    assert (a * (b + c)).isclose(a * b + a * c, tol=1e-9)


@settings(max_examples=60, deadline=None)
@given(multivectors(), multivectors())
def test_dagger_reverses_products(a, b):
    assert dagger(a * b).isclose(dagger(b) * dagger(a), tol=1e-9)
    assert dagger(dagger(a)).isclose(a)


@settings(max_examples=60, deadline=None)
@given(multivectors())
def test_norm_is_coefficient_l2(a):
    expected = math.sqrt(sum(abs(c) ** 2 for c in a.coeffs.values()))
    assert norm(a) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_spatial_generators_anticommute_with_witt_pair(n, data):
    j = data.draw(st.integers(1, 2 * n))
    f, fd = witt_pair(n)
    g = Multivector.generator(n, j)
    assert (g * f + f * g).is_zero()
    assert (g * fd + fd * g).is_zero()

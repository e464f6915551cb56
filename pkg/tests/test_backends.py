import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyleblond import _core, _pykernels
from levyleblond.clifford import Signature

MODS = _core.backends()


def test_default_backend_is_reported():
    assert _core.BACKEND in MODS
    assert set(MODS) <= {"python", "cython"}


def test_pure_python_switch():
    env = dict(os.environ, LLL_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import levyleblond; print(levyleblond.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.data())
def test_blade_sign_agrees_with_counted_swaps(n, data):
    a = data.draw(st.integers(0, (1 << (2 * n + 2)) - 1))
    b = data.draw(st.integers(0, (1 << (2 * n + 2)) - 1))
    # independent count: reorder a then b into ascending order, then square repeated generators
    sign = 1
    bits_a = [j for j in range(2 * n + 2) if a >> j & 1]
    for j in range(2 * n + 2):
        if b >> j & 1:
            sign *= (-1) ** sum(1 for i in bits_a if i > j)
            if a >> j & 1:
                sign *= Signature(n).square(j)
    for mod in MODS.values():
        assert mod.blade_sign(a, b, n) == sign


@pytest.mark.skipif("cython" not in MODS, reason="compiled kernels not built")
@pytest.mark.parametrize("n", [1, 2, 3])
def test_backends_agree(n, rng):
    full = np.arange(1 << (2 * n + 2), dtype=np.int64)
    xb, yb = full[::3].copy(), full[1::2].copy()
    x = rng.normal(size=(17, len(xb))) + 1j * rng.normal(size=(17, len(xb)))
    y = rng.normal(size=(17, len(yb))) + 1j * rng.normal(size=(17, len(yb)))
    tp, tc = MODS["python"].product_table(xb, yb, n), MODS["cython"].product_table(xb, yb, n)
    for a, b in zip(tp, tc):
        assert np.array_equal(a, b)
    bp, op = MODS["python"].field_product(xb, x, yb, y, n)
    bc, oc = MODS["cython"].field_product(xb, x, yb, y, n)
    assert np.array_equal(bp, bc)
    assert np.allclose(op, oc, rtol=1e-13, atol=1e-13)


def test_python_field_product_matches_dense_sum(rng):
    n = 1
    xb = np.array([0, 2, 5], dtype=np.int64)
    yb = np.array([1, 2, 15], dtype=np.int64)
    x = rng.normal(size=(4, 3)) + 0j
    y = rng.normal(size=(4, 3)) + 0j
    blades, out = _pykernels.field_product(xb, x, yb, y, n)
    ref = {}
    for i, a in enumerate(xb):
        for j, b in enumerate(yb):
            s = _pykernels.blade_sign(int(a), int(b), n)
            ref[int(a) ^ int(b)] = ref.get(int(a) ^ int(b), 0) + s * x[:, i] * y[:, j]
    for k, bl in enumerate(blades):
        assert np.allclose(out[:, k], ref[int(bl)])

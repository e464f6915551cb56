import struct

import numpy as np
import pytest

from levyleblond.io import (
    BATCH_FLAG,
    MOMENTUM_FLAG,
    LLFDFormatError,
    atomic_write,
    decode_llfd,
    encode_llfd,
    field_csv,
    read_llfd,
    write_llfd,
)
from levyleblond.lattice import LatticeField, LatticeSpec
from levyleblond.spectral import SpectralField, forward_dft

from conftest import random_field


def test_header_layout():
    s = LatticeSpec(2, 4, 0.5)
    f = LatticeField.delta(s, value=2.0)
    buf = encode_llfd(f)
    assert buf[:4] == b"LLFD"
    assert struct.unpack_from("<IIId", buf, 4) == (1, 2, 4, 0.5)
    assert struct.unpack_from("<II", buf, 24) == (1, 0)
    assert len(buf) == 4 + 20 + 8 + 16 * 16
    assert np.frombuffer(buf[32:48], dtype="<c16")[0] == 2.0


def test_roundtrip_bit_exact(tmp_path, rng):
    s = LatticeSpec(2, 4, 0.3)
    f = random_field(s, rng, blades=[0, 2, 6])
    back = read_llfd(write_llfd(tmp_path / "f.llfd", f))
    assert isinstance(back, LatticeField) and back.spec == s and back.blades == f.blades
    assert np.array_equal(back.data, f.data)


def test_spectral_and_batched_roundtrip(rng):
    s = LatticeSpec(1, 8, 1.0)
    F = forward_dft(random_field(s, rng))
    buf = encode_llfd(F)
    assert struct.unpack_from("<I", buf, 4)[0] & MOMENTUM_FLAG
    back = decode_llfd(buf)
    assert isinstance(back, SpectralField) and np.array_equal(back.data, F.data)
    path = LatticeField(s, [0, 2], rng.normal(size=(3, 2, 8, 2)) + 0j)
    buf = encode_llfd(path)
    assert struct.unpack_from("<I", buf, 4)[0] & BATCH_FLAG
    back = decode_llfd(buf)
    assert back.batch_shape == (3, 2) and np.array_equal(back.data, path.data)


def test_malformed_files():
    s = LatticeSpec(1, 4, 1.0)
    buf = encode_llfd(LatticeField.delta(s))
    with pytest.raises(LLFDFormatError):
        decode_llfd(b"NOPE" + buf[4:])
    with pytest.raises(LLFDFormatError):
        decode_llfd(buf[:-8])
    with pytest.raises(LLFDFormatError):
        decode_llfd(buf[:10])
    bad_version = buf[:4] + struct.pack("<I", 7) + buf[8:]
    with pytest.raises(LLFDFormatError):
        decode_llfd(bad_version)


def test_csv_export():
    s = LatticeSpec(1, 4, 0.5)
    text = field_csv(LatticeField.delta(s, (1,), 1 + 2j))
    lines = text.splitlines()
    assert lines[0] == "x_1,re_0,im_0"
    assert lines[2] == "0.5,1.0,2.0"
    batched = field_csv(LatticeField(s, [0], np.zeros((2, 4, 1), dtype=complex)))
    assert batched.splitlines()[0] == "b_0,x_1,re_0,im_0" and len(batched.splitlines()) == 9


def test_atomic_write_leaves_no_temp(tmp_path):
    p = atomic_write(tmp_path / "sub" / "a.txt", "hello")
    assert p.read_text() == "hello"
    assert [q.name for q in p.parent.iterdir()] == ["a.txt"]

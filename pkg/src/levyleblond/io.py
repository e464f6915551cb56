"""Field files: the LLFD binary format and CSV export.

LLFD layout (little-endian)::

    b"LLFD"
    u32  version    low 16 bits = format version (1); bit 16 set for momentum-domain data
    u32  n
    u32  N
    f64  h
    u32  batch rank r, then r u32 batch extents   (present only when bit 17 is set)
    u32  blade count B
    u32  B blade bit patterns (ascending)
    complex f64 pairs (re, im) in row-major order over batch, sites, blades

Unbatched files are exactly the plain layout without the batch block.
"""
from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .lattice import BladeArray, LatticeField, LatticeSpec
from .spectral import SpectralField

MAGIC = b"LLFD"
FORMAT_VERSION = 1
MOMENTUM_FLAG = 1 << 16
BATCH_FLAG = 1 << 17


class LLFDFormatError(ValueError):
    """Malformed or unsupported LLFD content."""


def atomic_write(path, data: bytes | str) -> Path:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def encode_llfd(f: BladeArray) -> bytes:
    """Serialise a lattice or spectral field (batch axes allowed)."""
    spec = f.spec
    version = FORMAT_VERSION
    if isinstance(f, SpectralField):
        version |= MOMENTUM_FLAG
    batch = f.batch_shape
    if batch:
        version |= BATCH_FLAG
    parts = [MAGIC, struct.pack("<IIId", version, spec.n, spec.N, spec.h)]
    if batch:
        parts.append(struct.pack(f"<I{len(batch)}I", len(batch), *batch))
    parts.append(struct.pack(f"<I{len(f.blades)}I", len(f.blades), *f.blades))
    parts.append(np.ascontiguousarray(f.data, dtype="<c16").tobytes())
    return b"".join(parts)


def decode_llfd(buf: bytes) -> BladeArray:
    """Inverse of :func:`encode_llfd`; returns a LatticeField or SpectralField."""
    mv = memoryview(buf)
    if bytes(mv[:4]) != MAGIC:
        raise LLFDFormatError("not an LLFD file (bad magic)")
    try:
        version, n, N, h = struct.unpack_from("<IIId", mv, 4)
        off = 4 + struct.calcsize("<IIId")
        if version & 0xFFFF != FORMAT_VERSION:
            raise LLFDFormatError(f"unsupported LLFD version {version & 0xFFFF}")
        batch: tuple[int, ...] = ()
        if version & BATCH_FLAG:
            (rank,) = struct.unpack_from("<I", mv, off)
            batch = struct.unpack_from(f"<{rank}I", mv, off + 4)
            off += 4 + 4 * rank
        (count,) = struct.unpack_from("<I", mv, off)
        blades = struct.unpack_from(f"<{count}I", mv, off + 4)
        off += 4 + 4 * count
    except struct.error as exc:
        raise LLFDFormatError(f"truncated LLFD header: {exc}") from None
    spec = LatticeSpec(n, N, h)
    shape = tuple(batch) + spec.shape + (count,)
    expected = int(np.prod(shape)) * 16
    if len(mv) - off != expected:
        raise LLFDFormatError(f"payload has {len(mv) - off} bytes, expected {expected}")
    data = np.frombuffer(mv[off:], dtype="<c16").reshape(shape).astype(np.complex128)
    cls = SpectralField if version & MOMENTUM_FLAG else LatticeField
    return cls(spec, blades, data)


def write_llfd(path, f: BladeArray) -> Path:
    return atomic_write(path, encode_llfd(f))


def read_llfd(path) -> BladeArray:
    return decode_llfd(Path(path).read_bytes())


def field_csv(f: BladeArray) -> str:
    """One row per site: coordinates ``x_1 .. x_n``, then Re/Im per blade.

    Batched fields get leading ``b_0 ..`` columns for the batch indices.
    """
    spec = f.spec
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    batch = f.batch_shape
    head = [f"b_{i}" for i in range(len(batch))] + [f"x_{j + 1}" for j in range(spec.n)]
    for b in f.blades:
        head += [f"re_{b}", f"im_{b}"]
    w.writerow(head)
    for idx in np.ndindex(*(batch + spec.shape)):
        vals = f.data[idx]
        nb = len(batch)
        row = list(idx[:nb]) + [repr(float(i * spec.h)) for i in idx[nb:]]
        for v in vals:
            row += [repr(float(v.real)), repr(float(v.imag))]
        w.writerow(row)
    return buf.getvalue()


def write_csv(path, text: str) -> Path:
    return atomic_write(path, text)

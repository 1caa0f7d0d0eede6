"""Little-endian binary checkpoints of spectral vector fields.

Layout::

    offset  type      field
    0       4 bytes   magic b"LRAC"
    4       uint32    format version (1)
    8       uint32    n, spatial dimension
    12      uint32    N, modes per axis
    16      float64   L, period
    24      uint32    component count c
    28      float64[] (re, im) pairs, N^n * c of them

Coefficients follow row-major mode order (numpy FFT index order per axis,
last axis fastest) with the component index innermost.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import SpectralVectorField
from .grid import TorusGrid

MAGIC = b"LRAC"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdI")


class CheckpointError(ValueError):
    pass


def dumps(field: SpectralVectorField) -> bytes:
    g = field.grid
    header = _HEADER.pack(MAGIC, VERSION, g.n, g.N, float(g.L), g.n)
    body = np.moveaxis(field.coeffs, 0, -1).astype("<c16", copy=False)
    return header + np.ascontiguousarray(body).tobytes()


def loads(data: bytes, div_free: bool = True) -> SpectralVectorField:
    if len(data) < _HEADER.size:
        raise CheckpointError("truncated header")
    magic, version, n, N, L, c = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    grid = TorusGrid(n, N, L)
    expected = _HEADER.size + 16 * c * N**n
    if len(data) != expected:
        raise CheckpointError(f"expected {expected} bytes, got {len(data)}")
    body = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(grid.shape + (c,))
    return SpectralVectorField(grid, np.moveaxis(body, -1, 0).astype(complex), div_free)


def save(field: SpectralVectorField, path) -> Path:
    path = Path(path)
    path.write_bytes(dumps(field))
    return path


def load(path, div_free: bool = True) -> SpectralVectorField:
    return loads(Path(path).read_bytes(), div_free)

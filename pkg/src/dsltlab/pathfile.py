"""Binary path files.

Layout (little endian):
    magic   4 bytes  b"FBMP"
    version u16
    d       u16
    n       u64      number of grid intervals
    H       f64
    t       f64
    seed    u64
    method  u8       0 = circulant embedding, 1 = Cholesky
followed by d*(n+1) f64 path values, component-major.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fbm import FbmPath, GenerationMethod, HurstModel, TimeGrid

__all__ = ["write_path", "read_path", "FORMAT_VERSION"]

MAGIC = b"FBMP"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHQddQB")

_METHOD_CODE = {
    GenerationMethod.CIRCULANT_EMBEDDING: 0,
    GenerationMethod.CHOLESKY: 1,
}
_CODE_METHOD = {v: k for k, v in _METHOD_CODE.items()}


def write_path(path: FbmPath, filename) -> None:
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        path.model.d,
        path.grid.n,
        path.model.H,
        path.grid.t,
        path.seed & 0xFFFFFFFFFFFFFFFF,
        _METHOD_CODE[path.method],
    )
    body = np.ascontiguousarray(path.values, dtype="<f8").tobytes()
    Path(filename).write_bytes(header + body)


def read_path(filename) -> FbmPath:
    raw = Path(filename).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{filename}: truncated header")
    magic, version, d, n, H, t, seed, method_code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{filename}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"{filename}: unsupported version {version}")
    expected = _HEADER.size + 8 * d * (n + 1)
    if len(raw) != expected:
        raise ValueError(f"{filename}: expected {expected} bytes, got {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(d, n + 1).copy()
    model = HurstModel(H=H, d=d, t=t)
    grid = TimeGrid(n=n, t=t)
    return FbmPath(model=model, grid=grid, values=values, seed=seed, method=_CODE_METHOD[method_code])

"""Binary field snapshots ("TFLM").

Layout (little endian): magic ``TFLM``, u32 version = 1, u32 nx, u32 ny,
f64 t, f64 delta, epsilon, R, W, alpha, then the f64 arrays eta[nx],
u[nx*ny], v[nx*ny], p[nx*ny] in row-major (x, y) order.  Model runs write
ny = 0 and no bulk arrays.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ContractError
from .params import ScalingParams

__all__ = ["FieldSnapshot", "write_tflm", "read_tflm", "encode_tflm", "decode_tflm"]

MAGIC = b"TFLM"
VERSION = 1
_HEADER = struct.Struct("<4sIII6d")


@dataclass
class FieldSnapshot:
    t: float
    params: ScalingParams
    eta: np.ndarray
    u: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None

    @property
    def nx(self):
        return self.eta.size

    @property
    def ny(self):
        return 0 if self.u is None else self.u.shape[1]


def encode_tflm(snap: FieldSnapshot) -> bytes:
    prm = snap.params
    eta = np.ascontiguousarray(snap.eta, dtype="<f8")
    nx, ny = eta.size, snap.ny
    head = _HEADER.pack(MAGIC, VERSION, nx, ny, float(snap.t), prm.delta, prm.epsilon,
                        prm.reynolds, prm.weber, prm.alpha)
    parts = [head, eta.tobytes()]
    if ny:
        for f in (snap.u, snap.v, snap.p):
            arr = np.ascontiguousarray(f, dtype="<f8")
            if arr.shape != (nx, ny):
                raise ContractError(f"bulk array of shape {arr.shape}, expected {(nx, ny)}")
            parts.append(arr.tobytes())
    return b"".join(parts)


def decode_tflm(data: bytes) -> FieldSnapshot:
    if len(data) < _HEADER.size:
        raise ContractError("truncated TFLM header")
    magic, version, nx, ny, t, d, e, R, W, a = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ContractError("not a TFLM file (bad magic)")
    if version != VERSION:
        raise ContractError(f"unsupported TFLM version {version}")
    expected = _HEADER.size + 8 * (nx + 3 * nx * ny)
    if len(data) != expected:
        raise ContractError(f"TFLM payload has {len(data)} bytes, expected {expected}")
    off = _HEADER.size
    eta = np.frombuffer(data, dtype="<f8", count=nx, offset=off).astype(float)
    off += 8 * nx
    bulk = []
    for _ in range(3 if ny else 0):
        bulk.append(np.frombuffer(data, dtype="<f8", count=nx * ny, offset=off).reshape(nx, ny).astype(float))
        off += 8 * nx * ny
    prm = ScalingParams(d, e, R, W, a)
    if ny:
        return FieldSnapshot(t, prm, eta, *bulk)
    return FieldSnapshot(t, prm, eta)


def write_tflm(path, snap: FieldSnapshot):
    Path(path).write_bytes(encode_tflm(snap))


def read_tflm(path) -> FieldSnapshot:
    return decode_tflm(Path(path).read_bytes())

"""Binary ZWIT snapshots of phase-space fields, wave functions and density matrices.

Layout (little endian)::

    b"ZWIT" | version u16 | tag u8 | n_z u32 | n_p u32 |
    z_extent f64 | p_extent f64 | hbar f64 | mass f64 | samples f64...

Tags: ``P`` real (z, p) field, ``C`` complex (z, p), ``R`` complex (z, r),
``K`` complex (k, p), ``X`` quantum wave function (n_z complex samples),
``D`` coarse density matrix (even block then odd block, complex, row major).
Complex samples are stored as ``re, im`` pairs.
"""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .grid import GridSpec, PhaseField, make_grid
from .state import QuantumWaveFunction
from .transforms import CoarseDensityMatrix

__all__ = ["SnapshotError", "write_snapshot", "read_snapshot", "to_bytes", "from_bytes"]

MAGIC = b"ZWIT"
VERSION = 1
_HEADER = struct.Struct("<4sHBII4d")
_REP_TAGS = {"zr": "R", "kp": "K"}


class SnapshotError(ValueError):
    """Malformed or unsupported snapshot."""


def _header(tag: str, grid: GridSpec) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, ord(tag), grid.n_z, grid.n_p, grid.z_extent,
                        grid.p_extent, grid.hbar, grid.mass)


def _complex_bytes(a: np.ndarray) -> bytes:
    a = np.ascontiguousarray(a, dtype="<c16")
    return a.view("<f8").tobytes()


def to_bytes(obj) -> bytes:
    """Serialise a ``PhaseField``, ``QuantumWaveFunction`` or ``CoarseDensityMatrix``."""
    if isinstance(obj, CoarseDensityMatrix):
        return _header("D", obj.grid) + _complex_bytes(obj.even) + _complex_bytes(obj.odd)
    if isinstance(obj, QuantumWaveFunction):
        return _header("X", obj.grid) + _complex_bytes(obj.values)
    if isinstance(obj, PhaseField):
        if obj.rep == "zp" and not np.iscomplexobj(obj.values):
            body = np.ascontiguousarray(obj.values, dtype="<f8").tobytes()
            return _header("P", obj.grid) + body
        tag = _REP_TAGS.get(obj.rep, "C")
        return _header(tag, obj.grid) + _complex_bytes(obj.values)
    raise SnapshotError(f"cannot serialise {type(obj).__name__}")


def from_bytes(data: bytes):
    if len(data) < _HEADER.size:
        raise SnapshotError("truncated header")
    magic, version, tag, n_z, n_p, z_ext, p_ext, hbar, mass = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported version {version}")
    grid = make_grid(n_z, n_p, z_ext, p_ext, hbar, mass)
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    tag = chr(tag)

    def complex_block(start: int, shape) -> np.ndarray:
        count = int(np.prod(shape))
        chunk = body[2 * start:2 * (start + count)]
        if chunk.size != 2 * count:
            raise SnapshotError("truncated body")
        return chunk.view("<c16").reshape(shape).astype(complex)

    if tag == "P":
        if body.size != n_z * n_p:
            raise SnapshotError("body size does not match grid")
        return PhaseField(grid, body.reshape(n_z, n_p).astype(float))
    if tag in ("C", "R", "K"):
        rep = {"C": "zp", "R": "zr", "K": "kp"}[tag]
        return PhaseField(grid, complex_block(0, (n_z, n_p)), rep)
    if tag == "X":
        return QuantumWaveFunction(grid, complex_block(0, (n_z,)))
    if tag == "D":
        size = (n_z + n_p) // 2
        even = complex_block(0, (size, size))
        odd = complex_block(size * size, (size, size))
        return CoarseDensityMatrix(grid, even, odd)
    raise SnapshotError(f"unknown representation tag {tag!r}")


def write_snapshot(path, obj) -> Path:
    """Write atomically (temporary file, then rename)."""
    path = Path(path)
    data = to_bytes(obj)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_snapshot(path):
    return from_bytes(Path(path).read_bytes())

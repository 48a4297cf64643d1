"""File formats: the CMPX complex-matrix container and binary PGM images.

CMPX layout (all little-endian):

    bytes 0-3    magic "CMPX"
    bytes 4-7    format version, u32 (currently 1)
    bytes 8-15   rows, u64
    bytes 16-23  cols, u64
    payload      rows * cols complex entries, f64 (re, im) pairs, row-major

so the payload is exactly 16 * rows * cols bytes after a 24-byte header.
All writes are atomic: data lands in a temp file that is renamed over the
target.
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import CmpxError

CMPX_MAGIC = b"CMPX"
CMPX_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

PGM_MAXVAL = 255


def atomic_write_bytes(path, blob: bytes) -> None:
    """Write-temp-then-rename so readers never observe a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_matrix(path, matrix) -> None:
    """Serialize a complex matrix (or vector, stored as a column) to CMPX."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError("only 1-D or 2-D arrays can be saved")
    header = _HEADER.pack(CMPX_MAGIC, CMPX_VERSION, a.shape[0], a.shape[1])
    payload = np.ascontiguousarray(a).astype("<c16").tobytes()
    atomic_write_bytes(path, header + payload)


def load_matrix(path) -> np.ndarray:
    """Read a CMPX file back into a (rows, cols) complex128 array."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise CmpxError(f"malformed header: file is {len(blob)} bytes, header needs {_HEADER.size}")
    magic, version, rows, cols = _HEADER.unpack_from(blob)
    if magic != CMPX_MAGIC:
        raise CmpxError(f"malformed header: bad magic {magic!r}")
    if version != CMPX_VERSION:
        raise CmpxError(f"version mismatch: file has version {version}, reader supports {CMPX_VERSION}")
    expected = 16 * rows * cols
    payload = blob[_HEADER.size:]
    if len(payload) < expected:
        raise CmpxError(f"truncated payload: expected {expected} bytes, found {len(payload)}")
    if len(payload) > expected:
        raise CmpxError(f"oversized payload: expected {expected} bytes, found {len(payload)}")
    data = np.frombuffer(payload, dtype="<c16", count=rows * cols)
    return data.astype(np.complex128).reshape(rows, cols)


def export_image_pgm(image, path) -> None:
    """Render a reflectivity image as binary PGM (P5, maxval 255).

    Accepts a SceneImage or a square 2-D array.  Values are clamped to [0, 1]
    and scaled; negative input is rejected.
    """
    if hasattr(image, "as_matrix"):
        mat = image.as_matrix()
    else:
        mat = np.asarray(image, dtype=float)
        if mat.ndim == 1:
            side = int(round(len(mat) ** 0.5))
            if side * side != len(mat):
                raise ValueError("flat image length is not a perfect square")
            mat = mat.reshape(side, side)
    if mat.ndim != 2:
        raise ValueError("image must be 2-D")
    if (mat < 0).any():
        raise ValueError("image values must be nonnegative")
    scaled = np.round(np.minimum(mat, 1.0) * PGM_MAXVAL).astype(np.uint8)
    header = f"P5\n{mat.shape[1]} {mat.shape[0]}\n{PGM_MAXVAL}\n".encode("ascii")
    atomic_write_bytes(path, header + scaled.tobytes())


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()

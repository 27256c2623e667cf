"""Binary feature file reader/writer.

File layout (little-endian):

    magic   4 bytes  b"RUCF"
    u32     frame_count
    u32     feature_dim
    payload frame_count * feature_dim float32, row-major (frame-major)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import HeaderMismatch, TruncatedFile

MAGIC = b"RUCF"
_HEADER = struct.Struct("<4sII")


def write_features(path, matrix) -> None:
    """Write a 2-D float32 matrix. Round-trips bit-exactly with read_features."""
    m = np.ascontiguousarray(matrix, dtype="<f4")
    if m.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {m.shape}")
    frames, dim = m.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, frames, dim))
        f.write(m.tobytes())


def read_features(path, frame_count: int | None = None, dim: int | None = None):
    """Read a feature file, checking the header against expectations.

    frame_count / dim, when given, must match the header (HeaderMismatch
    otherwise). A payload whose byte count disagrees with the header raises
    TruncatedFile.
    """
    path = Path(path)
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise TruncatedFile(f"{path}: incomplete header")
        magic, n_frames, n_dim = _HEADER.unpack(header)
        if magic != MAGIC:
            raise HeaderMismatch(f"{path}: bad magic {magic!r}")
        if frame_count is not None and n_frames != frame_count:
            raise HeaderMismatch(
                f"{path}: header declares {n_frames} frames, expected {frame_count}"
            )
        if dim is not None and n_dim != dim:
            raise HeaderMismatch(
                f"{path}: header declares dim {n_dim}, expected {dim}"
            )
        payload = f.read()
    expected = n_frames * n_dim * 4
    if len(payload) != expected:
        raise TruncatedFile(
            f"{path}: payload has {len(payload)} bytes, header promises {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(n_frames, n_dim)

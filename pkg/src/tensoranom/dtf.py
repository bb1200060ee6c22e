"""DTF1 binary tensor files.

Layout: magic ``DTF1`` | dtype byte (0x01 float64, 0x02 uint8) | uint32-LE
mode count N | N uint64-LE shape entries | values little-endian in storage
order (C order, mode 1 most significant).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"DTF1"

_DTYPE_CODES = {np.dtype(np.float64): 0x01, np.dtype(np.uint8): 0x02}
_CODE_DTYPES = {0x01: np.dtype("<f8"), 0x02: np.dtype(np.uint8)}


def write_tensor(path, x: np.ndarray) -> None:
    """Write ``x`` as a DTF1 file.  bool arrays are stored as uint8."""
    x = np.asarray(x)
    if x.dtype == np.bool_:
        x = x.astype(np.uint8)
    elif x.dtype != np.uint8:
        x = np.ascontiguousarray(x, dtype=np.float64)
    code = _DTYPE_CODES[np.dtype(np.float64) if x.dtype != np.uint8 else np.dtype(np.uint8)]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", code))
        fh.write(struct.pack("<I", x.ndim))
        fh.write(struct.pack(f"<{x.ndim}Q", *x.shape))
        if x.dtype == np.uint8:
            fh.write(np.ascontiguousarray(x).tobytes())
        else:
            fh.write(np.ascontiguousarray(x, dtype="<f8").tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a DTF1 file back into a numpy array (float64 or uint8)."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a DTF1 file (bad magic {raw[:4]!r})")
    code = raw[4]
    if code not in _CODE_DTYPES:
        raise ValueError(f"{path}: unknown dtype byte 0x{code:02x}")
    (ndim,) = struct.unpack_from("<I", raw, 5)
    shape = struct.unpack_from(f"<{ndim}Q", raw, 9)
    offset = 9 + 8 * ndim
    dtype = _CODE_DTYPES[code]
    count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
    expected = offset + count * dtype.itemsize
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
    out = values.reshape(shape).copy()
    return out.astype(np.float64) if code == 0x01 else out

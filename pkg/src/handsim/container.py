"""Shared binary container for checkpoints: named tensors + a text config block.

Layout (all integers little-endian):
    magic     4 bytes (caller-defined)
    version   u16
    payload:
        config_len u32, config UTF-8 text
        count      u32
        per tensor: name_len u16, name UTF-8, dtype u8, ndim u8, ndim x u32 dims,
                    raw tensor bytes (little-endian, C order)
    crc32     u32 over the payload

dtype codes: 0 = float32, 1 = uint8, 2 = int64.
"""

from __future__ import annotations

import struct
import zlib
from typing import Mapping

import numpy as np


class ContainerError(Exception):
    pass


class BadMagicError(ContainerError):
    pass


class VersionError(ContainerError):
    pass


class ChecksumError(ContainerError):
    pass


class TruncatedError(ContainerError):
    pass


_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("u1"), 2: np.dtype("<i8")}
_CODES = {np.dtype("float32"): 0, np.dtype("uint8"): 1, np.dtype("int64"): 2}


def _encode_tensor(name: str, arr: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(arr)
    if arr.dtype not in _CODES:
        raise ContainerError(f"unsupported dtype {arr.dtype} for tensor '{name}'")
    nb = name.encode("utf-8")
    head = struct.pack("<H", len(nb)) + nb
    head += struct.pack("<BB", _CODES[arr.dtype], arr.ndim)
    head += struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
    return head + arr.astype(arr.dtype.newbyteorder("<")).tobytes()


def save_container(path, magic: bytes, version: int, config_text: str,
                   tensors: Mapping[str, np.ndarray]) -> None:
    if len(magic) != 4:
        raise ContainerError("magic must be 4 bytes")
    cfg = config_text.encode("utf-8")
    payload = struct.pack("<I", len(cfg)) + cfg + struct.pack("<I", len(tensors))
    for name, arr in tensors.items():
        payload += _encode_tensor(name, arr)
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack("<H", version))
        f.write(payload)
        f.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedError(f"container truncated at byte {self.pos}")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u(self, fmt: str) -> int:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))[0]


def load_container(path, magic: bytes, version: int) -> tuple[str, dict[str, np.ndarray]]:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 10:
        raise TruncatedError("file shorter than container header")
    if raw[:4] != magic:
        raise BadMagicError(f"expected magic {magic!r}, found {raw[:4]!r}")
    (got_version,) = struct.unpack("<H", raw[4:6])
    if got_version != version:
        raise VersionError(f"expected version {version}, found {got_version}")
    payload, crc_bytes = raw[6:-4], raw[-4:]
    (want_crc,) = struct.unpack("<I", crc_bytes)
    # Parse first so truncated files surface as TruncatedError rather than a
    # CRC mismatch; corruption that still parses is caught by the CRC below.
    r = _Reader(payload)
    cfg_len = r.u("<I")
    config_text = r.take(cfg_len).decode("utf-8")
    count = r.u("<I")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        name_len = r.u("<H")
        name = r.take(name_len).decode("utf-8")
        dtype = _DTYPES.get(r.u("<B"))
        if dtype is None:
            raise ContainerError(f"unknown dtype code in tensor '{name}'")
        ndim = r.u("<B")
        shape = tuple(r.u("<I") for _ in range(ndim))
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize if ndim else dtype.itemsize
        data = np.frombuffer(r.take(nbytes), dtype=dtype)
        tensors[name] = data.reshape(shape).copy()
    if zlib.crc32(payload) & 0xFFFFFFFF != want_crc:
        raise ChecksumError("payload CRC32 mismatch")
    return config_text, tensors

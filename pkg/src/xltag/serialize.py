"""Low-level binary I/O helpers for the model file formats.

All integers are little-endian fixed width; all floats are little-endian
IEEE 754 doubles; strings are a u32 byte length followed by UTF-8 bytes.
"""

from __future__ import annotations

import struct
import zlib
from typing import BinaryIO

import numpy as np

from .errors import DataError


class Writer:
    def __init__(self, fh: BinaryIO):
        self._fh = fh
        self._crc = 0

    def raw(self, data: bytes) -> None:
        self._crc = zlib.crc32(data, self._crc)
        self._fh.write(data)

    def magic(self, tag: bytes) -> None:
        self.raw(tag)

    def u8(self, value: int) -> None:
        self.raw(struct.pack("<B", value))

    def u32(self, value: int) -> None:
        self.raw(struct.pack("<I", value))

    def i64(self, value: int) -> None:
        self.raw(struct.pack("<q", value))

    def f64(self, value: float) -> None:
        self.raw(struct.pack("<d", value))

    def string(self, value: str) -> None:
        data = value.encode("utf-8")
        self.u32(len(data))
        self.raw(data)

    def array(self, arr: np.ndarray) -> None:
        """2-D float64 array, row-major, preceded by its shape."""
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        self.u32(arr.shape[0])
        self.u32(arr.shape[1])
        self.raw(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    def checksum(self) -> None:
        """Append the CRC32 of everything written so far (not CRC'd itself)."""
        self._fh.write(struct.pack("<I", self._crc))


class Reader:
    def __init__(self, fh: BinaryIO):
        self._fh = fh
        self._crc = 0

    def raw(self, size: int) -> bytes:
        data = self._fh.read(size)
        if len(data) != size:
            raise DataError("truncated model file")
        self._crc = zlib.crc32(data, self._crc)
        return data

    def magic(self, expected: bytes) -> None:
        got = self.raw(len(expected))
        if got != expected:
            raise DataError(
                f"bad file magic: expected {expected!r}, found {got!r}"
            )

    def u8(self) -> int:
        return struct.unpack("<B", self.raw(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.raw(4))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self.raw(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.raw(8))[0]

    def string(self) -> str:
        size = self.u32()
        return self.raw(size).decode("utf-8")

    def array(self) -> np.ndarray:
        rows = self.u32()
        cols = self.u32()
        data = self.raw(rows * cols * 8)
        return np.frombuffer(data, dtype="<f8").reshape(rows, cols).copy()

    def checksum(self) -> None:
        """Verify the trailing CRC32 against everything read so far."""
        expected = self._crc
        stored = struct.unpack("<I", self._fh.read(4))[0]
        if stored != expected:
            raise DataError("model file checksum mismatch")

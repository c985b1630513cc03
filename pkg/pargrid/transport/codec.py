"""
Frame codec shared by both backends.

Frame layout (big-endian header, 21 bytes):

    u32 payload length N | u32 tag | u32 source rank | u8 element kind |
    u32 rows | u32 cols | N payload bytes

Element kinds: 0 = raw bytes, 1 = f64, 2 = complex f64. Numeric payloads
are little-endian IEEE-754, row-major; complex values are (re, im) pairs.
"""

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import BinaryIO, Optional, Union

import numpy as np

from ..exceptions import FrameError

HEADER = struct.Struct(">IIIBII")
MAX_U32 = 0xFFFFFFFF

Payload = Union[bytes, bytearray, memoryview, np.ndarray, float, int, complex, list, tuple]


class ElemKind(IntEnum):
    """Element kind code carried in the frame header."""

    BYTES = 0
    F64 = 1
    C128 = 2

    @property
    def wire_dtype(self) -> Optional[np.dtype]:
        if self is ElemKind.F64:
            return np.dtype("<f8")
        if self is ElemKind.C128:
            return np.dtype("<c16")
        return None

    @property
    def itemsize(self) -> int:
        dtype = self.wire_dtype
        return 1 if dtype is None else dtype.itemsize


@dataclass(frozen=True)
class Message:
    """A decoded frame. ``data`` is ``bytes`` or a 2-D numpy matrix."""

    source: int
    tag: int
    kind: ElemKind
    data: Union[bytes, np.ndarray]

    @property
    def shape(self):
        if self.kind is ElemKind.BYTES:
            return (1, len(self.data))
        return self.data.shape

    def vector(self) -> np.ndarray:
        """Numeric payload flattened to 1-D (row-major)."""

        if self.kind is ElemKind.BYTES:
            raise FrameError("bytes payload has no numeric vector view")
        return self.data.reshape(-1)

    def text(self, encoding: str = "utf-8") -> str:
        if self.kind is not ElemKind.BYTES:
            raise FrameError("numeric payload cannot be decoded as text")
        return self.data.decode(encoding)


def _as_matrix(payload: Payload) -> np.ndarray:
    array = np.asarray(payload)
    if array.ndim == 0:
        return array.reshape(1, 1)
    if array.ndim == 1:
        return array.reshape(1, -1)
    if array.ndim == 2:
        return array
    raise FrameError(f"payloads are at most 2-D, got shape {array.shape}")


def encode_frame(source: int, tag: int, payload: Payload) -> bytes:
    """Serialize a payload into one frame. The result owns a copy of the data."""

    if not 0 <= tag <= MAX_U32:
        raise FrameError(f"tag {tag} is not a 32-bit unsigned integer")

    if isinstance(payload, (bytes, bytearray, memoryview)):
        body = bytes(payload)
        kind, rows, cols = ElemKind.BYTES, 1, len(body)
    else:
        matrix = _as_matrix(payload)
        if np.iscomplexobj(matrix):
            kind = ElemKind.C128
        elif matrix.dtype.kind in "biuf":
            kind = ElemKind.F64
        else:
            raise FrameError(f"unsupported payload dtype {matrix.dtype}")
        rows, cols = matrix.shape
        body = np.ascontiguousarray(matrix, dtype=kind.wire_dtype).tobytes()

    if len(body) > MAX_U32:
        raise FrameError(f"payload of {len(body)} bytes exceeds the frame limit")
    return HEADER.pack(len(body), tag, source, int(kind), rows, cols) + body


def decode_frame(frame: bytes) -> Message:
    if len(frame) < HEADER.size:
        raise FrameError(f"frame of {len(frame)} bytes is shorter than its header")

    length, tag, source, kind_code, rows, cols = HEADER.unpack_from(frame)
    try:
        kind = ElemKind(kind_code)
    except ValueError as exc:
        raise FrameError(f"unknown element kind code {kind_code}") from exc

    if len(frame) != HEADER.size + length:
        raise FrameError(f"header declares {length} payload bytes, frame carries {len(frame) - HEADER.size}")
    if length != kind.itemsize * rows * cols:
        raise FrameError(f"{length} bytes inconsistent with {kind.name} {rows}x{cols}")

    body = frame[HEADER.size:]
    if kind is ElemKind.BYTES:
        return Message(source=source, tag=tag, kind=kind, data=bytes(body))

    native = np.complex128 if kind is ElemKind.C128 else np.float64
    data = np.frombuffer(body, dtype=kind.wire_dtype).astype(native).reshape(rows, cols)
    return Message(source=source, tag=tag, kind=kind, data=data)


def _read_exact(stream: BinaryIO, count: int) -> bytes:
    chunks = []
    remaining = count
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(stream: BinaryIO) -> Optional[bytes]:
    """Read one whole frame from a byte stream; ``None`` on clean EOF."""

    header = _read_exact(stream, HEADER.size)
    if not header:
        return None
    if len(header) < HEADER.size:
        raise FrameError("stream ended inside a frame header")

    length = HEADER.unpack_from(header)[0]
    body = _read_exact(stream, length)
    if len(body) < length:
        raise FrameError(f"stream ended after {len(body)} of {length} payload bytes")
    return header + body

"""Core data containers and input formats.

Items are immutable byte strings with an opaque id.  Multisets of items
can be serialized for compression either by raw concatenation or with a
self-delimiting prefix code (per item: one 1-bit per payload bit, a
0-bit separator, then the payload bits, packed big-endian and
zero-padded to a whole byte).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, FormatError

IDX_MAGIC_1D = 0x00000801
IDX_MAGIC_3D = 0x00000803


@dataclass(frozen=True)
class Item:
    """One clusterable object: a stable id and its raw bytes."""

    id: str
    data: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.data, bytes):
            raise DomainError(f"item {self.id!r}: payload must be bytes")


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of items; order defines matrix/label indexing."""

    items: tuple[Item, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))

    @classmethod
    def of(cls, blobs: Iterable[bytes], prefix: str = "") -> "Dataset":
        return cls(tuple(Item(f"{prefix}{i}", b) for i, b in enumerate(blobs)))

    @property
    def n(self) -> int:
        return len(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i: int) -> Item:
        return self.items[i]


@dataclass(frozen=True, eq=False)
class PointSet:
    """Real vectors of a shared dimension d >= 1, stored as float64."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise DomainError(f"points must be (n, d>=1), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("points must be finite")
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


class _BitWriter:
    def __init__(self) -> None:
        self.buf = bytearray()
        self.nbits = 0  # bits written so far

    def _tail(self) -> int:
        return self.nbits & 7

    def write_zero(self) -> None:
        if self._tail() == 0:
            self.buf.append(0)
        self.nbits += 1

    def write_ones(self, count: int) -> None:
        while count > 0 and self._tail() != 0:
            self.buf[-1] |= 0x80 >> self._tail()
            self.nbits += 1
            count -= 1
        whole, rest = divmod(count, 8)
        if whole:
            self.buf.extend(b"\xff" * whole)
            self.nbits += whole * 8
        for _ in range(rest):
            if self._tail() == 0:
                self.buf.append(0)
            self.buf[-1] |= 0x80 >> self._tail()
            self.nbits += 1

    def write_bytes(self, data: bytes) -> None:
        off = self._tail()
        if off == 0:
            self.buf.extend(data)
        else:
            for b in data:
                self.buf[-1] |= b >> off
                self.buf.append((b << (8 - off)) & 0xFF)
        self.nbits += 8 * len(data)


class _BitReader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0  # bit cursor
        self.total = 8 * len(data)

    def remaining(self) -> int:
        return self.total - self.pos

    def peek_any_one(self) -> bool:
        """True if any 1-bit remains at or after the cursor."""
        byte_i, bit_i = divmod(self.pos, 8)
        if byte_i >= len(self.data):
            return False
        if self.data[byte_i] & (0xFF >> bit_i):
            return True
        return any(self.data[i] for i in range(byte_i + 1, len(self.data)))

    def read_bit(self) -> int:
        byte_i, bit_i = divmod(self.pos, 8)
        self.pos += 1
        return (self.data[byte_i] >> (7 - bit_i)) & 1

    def read_bytes(self, count: int) -> bytes:
        byte_i, bit_i = divmod(self.pos, 8)
        self.pos += 8 * count
        if bit_i == 0:
            return self.data[byte_i : byte_i + count]
        out = bytearray(count)
        for k in range(count):
            hi = self.data[byte_i + k] << bit_i
            lo = self.data[byte_i + k + 1] >> (8 - bit_i)
            out[k] = (hi | lo) & 0xFF
        return bytes(out)


def encode_multiset(items: Sequence[Item | bytes], mode: str = "concat") -> bytes:
    """Serialize a multiset of items into one byte string.

    ``concat`` joins payloads directly (the experiment default); ``prefix``
    uses the self-delimiting code described in the module docstring.
    An empty multiset encodes to the empty byte string in either mode.
    """
    blobs = [it.data if isinstance(it, Item) else it for it in items]
    if mode == "concat":
        return b"".join(blobs)
    if mode != "prefix":
        raise DomainError(f"unknown multiset encoding mode {mode!r}")
    if not blobs:
        return b""
    w = _BitWriter()
    for b in blobs:
        w.write_ones(8 * len(b))
        w.write_zero()
        w.write_bytes(b)
    return bytes(w.buf)


def decode_multiset(data: bytes) -> list[bytes]:
    """Invert ``encode_multiset(..., mode="prefix")``.

    Caveat: the zero-padded final byte makes trailing *empty* items
    indistinguishable from padding, so sequences are recovered exactly
    only up to trailing empties (see the codec tests).
    """
    r = _BitReader(data)
    out: list[bytes] = []
    while r.remaining() >= 8 or r.peek_any_one():
        nbits = 0
        while True:
            if r.remaining() == 0:
                raise FormatError("prefix code truncated inside length field")
            if r.read_bit() == 0:
                break
            nbits += 1
        if nbits % 8 != 0:
            raise FormatError(f"prefix code declares {nbits} bits, not a whole byte count")
        nbytes = nbits // 8
        if r.remaining() < nbits:
            raise FormatError(
                f"prefix code truncated: payload needs {nbits} bits, {r.remaining()} left"
            )
        out.append(r.read_bytes(nbytes))
    return out


def load_idx(path) -> Dataset:
    """Read an IDX tensor file into a Dataset (one item per outermost index).

    Accepts unsigned-byte tensors of rank 3 (magic 0x00000803; items are
    rows*cols pixel blocks) or rank 1 (magic 0x00000801; 1-byte items).
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise FormatError(f"IDX header truncated: {len(raw)} bytes")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic == IDX_MAGIC_3D:
        ndim = 3
    elif magic == IDX_MAGIC_1D:
        ndim = 1
    else:
        raise FormatError(
            f"bad IDX magic 0x{magic:08X}; expected 0x{IDX_MAGIC_1D:08X} or 0x{IDX_MAGIC_3D:08X}"
        )
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise FormatError(f"IDX header truncated: {len(raw)} bytes, need {header}")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    count = dims[0]
    item_size = 1
    for d in dims[1:]:
        item_size *= d
    expected = count * item_size
    payload = raw[header:]
    if len(payload) != expected:
        raise FormatError(
            f"IDX payload size mismatch: expected {expected} bytes, got {len(payload)}"
        )
    items = tuple(
        Item(str(i), bytes(payload[i * item_size : (i + 1) * item_size]))
        for i in range(count)
    )
    return Dataset(items)


def load_points_csv(path) -> PointSet:
    """Read comma-separated real vectors; a non-numeric first line is
    treated as a header.  Raises FormatError with row/column positions."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    rows: list[list[float]] = []
    width = None
    start = 0
    if lines:
        first = [t.strip() for t in lines[0].split(",")]
        if first and all(t for t in first):
            try:
                [float(t) for t in first]
            except ValueError:
                start = 1
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        toks = [t.strip() for t in line.split(",")]
        if width is None:
            width = len(toks)
        elif len(toks) != width:
            raise FormatError(
                f"row {lineno}: expected {width} columns, got {len(toks)}"
            )
        vals = []
        for col, tok in enumerate(toks, start=1):
            try:
                vals.append(float(tok))
            except ValueError:
                raise FormatError(
                    f"row {lineno}, column {col}: not a number: {tok!r}"
                ) from None
        rows.append(vals)
    if not rows:
        raise FormatError("no data rows")
    return PointSet(np.array(rows, dtype=np.float64))

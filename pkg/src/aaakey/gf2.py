"""Packed GF(2) bit vectors and matrices, XOR accumulation, rank, binary entropy.

Bit layout
----------
Bits are packed into little-endian ``uint64`` words: bit ``i`` of a vector
lives in word ``i // 64`` at position ``i % 64`` (value ``1 << (i % 64)``).
Padding bits past ``len`` are always zero.

Read as an integer, a vector is ``sum(bit_i << i)``. The JSON form
``{"len": n, "hex": "..."}`` writes that integer as hex with the most
significant digit first, zero-padded to ``ceil(n / 4)`` digits. Bit 0 is
therefore the lowest bit of the *last* hex digit.

Matrices store each row as one such vector (row-major).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, LengthMismatchError

WORD = 64


def _nwords(nbits: int) -> int:
    return (nbits + WORD - 1) // WORD


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into uint64 words (little-endian bits)."""
    bits = np.asarray(bits, dtype=np.uint8)
    nbits = bits.shape[-1]
    nw = _nwords(nbits)
    pad = nw * WORD - nbits
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def _unpack(words: np.ndarray, nbits: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, bitorder="little")[..., :nbits]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.uint64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BitVec:
    """Immutable fixed-length bit string over GF(2)."""

    len: int
    words: np.ndarray

    def __post_init__(self):
        if self.len < 0:
            raise ValueError("negative length")
        if self.words.shape != (_nwords(self.len),):
            raise ValueError(f"expected {_nwords(self.len)} words, got shape {self.words.shape}")
        object.__setattr__(self, "words", _frozen(self.words))
        tail = self.len % WORD
        if tail and int(self.words[-1]) >> tail:
            raise ValueError("padding bits beyond len must be zero")

    @classmethod
    def zeros(cls, n: int) -> "BitVec":
        return cls(n, np.zeros(_nwords(n), np.uint64))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVec":
        arr = np.fromiter((int(b) & 1 for b in bits), dtype=np.uint8)
        return cls(arr.size, _pack(arr))

    @classmethod
    def from_str(cls, s: str) -> "BitVec":
        """Parse a bit string such as ``"1010"``; character ``k`` is bit ``k``."""
        return cls.from_bits(int(c) for c in s if c in "01")

    @classmethod
    def from_int(cls, value: int, n: int) -> "BitVec":
        if value < 0 or value >> n:
            raise ValueError(f"{value} does not fit in {n} bits")
        nw = _nwords(n)
        words = [(value >> (WORD * k)) & 0xFFFFFFFFFFFFFFFF for k in range(nw)]
        return cls(n, np.array(words, dtype=np.uint64))

    @classmethod
    def from_hex(cls, n: int, hexstr: str) -> "BitVec":
        return cls.from_int(int(hexstr, 16) if hexstr else 0, n)

    @classmethod
    def from_json(cls, obj: dict) -> "BitVec":
        return cls.from_hex(int(obj["len"]), obj["hex"])

    def to_bits(self) -> np.ndarray:
        return _unpack(self.words, self.len)

    def to_int(self) -> int:
        return sum(int(w) << (WORD * k) for k, w in enumerate(self.words))

    def to_hex(self) -> str:
        if self.len == 0:
            return ""
        return format(self.to_int(), "0{}x".format((self.len + 3) // 4))

    def to_json(self) -> dict:
        return {"len": self.len, "hex": self.to_hex()}

    def __str__(self) -> str:
        return "".join(map(str, self.to_bits()))

    def __repr__(self) -> str:
        return f"BitVec({self.len}, '{self}')" if self.len <= 64 else f"BitVec({self.len}, hex={self.to_hex()})"

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return int(self.words[i // WORD] >> np.uint64(i % WORD)) & 1

    def __len__(self) -> int:
        return self.len

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVec):
            return NotImplemented
        return self.len == other.len and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.len, self.words.tobytes()))

    def __xor__(self, other: "BitVec") -> "BitVec":
        return xor_into(self, other)

    def popcount(self) -> int:
        return int(self.to_bits().sum())

    def concat(self, other: "BitVec") -> "BitVec":
        return BitVec.from_bits(np.concatenate([self.to_bits(), other.to_bits()]))


def xor_into(acc: BitVec, x: BitVec) -> BitVec:
    """Return ``acc XOR x`` as a new vector."""
    if acc.len != x.len:
        raise LengthMismatchError(f"cannot XOR {acc.len}-bit and {x.len}-bit vectors")
    return BitVec(acc.len, np.bitwise_xor(acc.words, x.words))


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Immutable GF(2) matrix, rows packed as :class:`BitVec` words."""

    rows: int
    cols: int
    data: np.ndarray  # shape (rows, nwords(cols))

    def __post_init__(self):
        if self.data.shape != (self.rows, _nwords(self.cols)):
            raise ValueError(f"data shape {self.data.shape} does not match {self.rows}x{self.cols}")
        object.__setattr__(self, "data", _frozen(self.data))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, _nwords(cols)), np.uint64))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_array(cls, a) -> "BitMatrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows, cols = a.shape
        return cls(rows, cols, _pack(a) if rows else np.zeros((0, _nwords(cols)), np.uint64))

    @classmethod
    def from_columns(cls, columns: Sequence[int], rows: int) -> "BitMatrix":
        """Build a ``rows x len(columns)`` matrix; bit ``r`` of ``columns[j]`` is entry (r, j)."""
        a = np.zeros((rows, len(columns)), np.uint8)
        for j, c in enumerate(columns):
            for r in range(rows):
                a[r, j] = (c >> r) & 1
        return cls.from_array(a)

    def to_array(self) -> np.ndarray:
        if self.rows == 0:
            return np.zeros((0, self.cols), np.uint8)
        return _unpack(self.data, self.cols)

    def row(self, i: int) -> BitVec:
        return BitVec(self.cols, self.data[i])

    def column_ints(self) -> list[int]:
        """Columns as integers (bit ``r`` = row ``r``)."""
        a = self.to_array()
        weights = [1 << r for r in range(self.rows)]
        return [sum(w for w, b in zip(weights, a[:, j]) if b) for j in range(self.cols)]

    def concat_cols(self, other: "BitMatrix") -> "BitMatrix":
        if self.rows != other.rows:
            raise LengthMismatchError(f"row counts differ: {self.rows} vs {other.rows}")
        return BitMatrix.from_array(np.hstack([self.to_array(), other.to_array()]))

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "data": [self.row(i).to_json() for i in range(self.rows)]}

    @classmethod
    def from_json(cls, obj: dict) -> "BitMatrix":
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = np.array([BitVec.from_json(r).words for r in obj["data"]], dtype=np.uint64)
        return cls(rows, cols, data.reshape(rows, _nwords(cols)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and bool(np.array_equal(self.data, other.data))

    __hash__ = None


def concat_cols(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    return a.concat_cols(b)


def reduce_into_basis(basis: dict[int, int], v: int) -> bool:
    """Insert ``v`` into an XOR basis keyed by leading bit. Returns True if rank grew.

    ``basis`` is modified in place.
    """
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            basis[top] = v
            return True
        v ^= b
    return False


def rank(m: BitMatrix) -> int:
    """GF(2) rank by row elimination on a working copy of the rows."""
    if m.rows == 0 or m.cols == 0:
        return 0
    basis: dict[int, int] = {}
    for i in range(m.rows):
        row = sum(int(w) << (WORD * k) for k, w in enumerate(m.data[i]))
        reduce_into_basis(basis, row)
    return len(basis)


_ENTROPY_SLACK = 1e-12


def binary_entropy(eta: float) -> float:
    """h(eta) = -eta log2 eta - (1-eta) log2 (1-eta), with 0 log 0 = 0."""
    if not (-_ENTROPY_SLACK <= eta <= 1 + _ENTROPY_SLACK):
        raise DomainError(f"probability {eta!r} outside [0, 1]")
    eta = min(max(eta, 0.0), 1.0)
    if eta == 0.0 or eta == 1.0:
        return 0.0
    return -eta * math.log2(eta) - (1.0 - eta) * math.log2(1.0 - eta)


def binary_entropy_array(eta) -> np.ndarray:
    """Vectorised :func:`binary_entropy` with the same clamping rule."""
    eta = np.asarray(eta, dtype=float)
    if np.any((eta < -_ENTROPY_SLACK) | (eta > 1 + _ENTROPY_SLACK)) or np.any(np.isnan(eta)):
        raise DomainError("probability outside [0, 1]")
    eta = np.clip(eta, 0.0, 1.0)
    out = np.zeros_like(eta)
    inner = (eta > 0.0) & (eta < 1.0)
    e = eta[inner]
    out[inner] = -e * np.log2(e) - (1.0 - e) * np.log2(1.0 - e)
    return out

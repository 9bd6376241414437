"""Dense GF(2) linear algebra on bit-packed arrays.

Vectors and matrices store their bits LSB-first inside 64-bit words: bit i
lives in word i // 64 at position i % 64, and bits past the declared
length are kept zero.  Values are immutable after construction; operations
return fresh objects.  The elimination and scan kernels come from
byzfount._kernels (compiled when available, pure Python otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND as kernel_backend
from ._kernels import impl as _kern

WORD = 64


def _nwords(nbits: int) -> int:
    return max(1, (nbits + WORD - 1) // WORD)


def _tail_mask(nbits: int) -> int:
    rem = nbits % WORD
    return (1 << rem) - 1 if rem else (1 << WORD) - 1


def _check_canonical(words: np.ndarray, nbits: int) -> None:
    if nbits == 0:
        if np.any(words):
            raise ValueError("bits set beyond declared length")
        return
    tail = int(words[..., -1].max()) if words.size else 0
    if tail & ~_tail_mask(nbits):
        raise ValueError("bits set beyond declared length")
    used = _nwords(nbits)
    if words.shape[-1] > used and np.any(words[..., used:]):
        raise ValueError("bits set beyond declared length")


def _pack_bit_rows(bits: np.ndarray) -> np.ndarray:
    """(rows, nbits) 0/1 array -> (rows, words) uint64, LSB first."""
    rows, nbits = bits.shape
    nw = _nwords(nbits)
    packed = np.packbits(bits.astype(np.uint8), axis=1, bitorder="little")
    buf = np.zeros((rows, nw * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    return buf.view("<u8").astype(np.uint64)


def _unpack_bit_rows(words: np.ndarray, nbits: int) -> np.ndarray:
    raw = words.astype("<u8", copy=False).view(np.uint8)
    bits = np.unpackbits(raw, axis=-1, bitorder="little")
    return bits[..., :nbits]


class BitVector:
    """Fixed-length bit vector over GF(2)."""

    __slots__ = ("_words", "_n")

    def __init__(self, words: np.ndarray, n: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 1 or words.shape[0] != _nwords(n):
            raise ValueError("word buffer does not match length")
        _check_canonical(words, n)
        words.flags.writeable = False
        self._words = words
        self._n = int(n)

    # ---- constructors

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(np.zeros(_nwords(n), dtype=np.uint64), n)

    @classmethod
    def ones(cls, n: int) -> "BitVector":
        return ~cls.zeros(n)

    @classmethod
    def from_int(cls, value: int, n: int) -> "BitVector":
        if value < 0 or (n < value.bit_length()):
            raise ValueError("value out of range for declared length")
        raw = value.to_bytes(_nwords(n) * 8, "little")
        return cls(np.frombuffer(raw, dtype="<u8").astype(np.uint64), n)

    @classmethod
    def from_bits(cls, bits) -> "BitVector":
        arr = np.asarray(bits, dtype=np.uint8).reshape(1, -1)
        return cls(_pack_bit_rows(arr)[0], arr.shape[1])

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        return cls.from_bits([1 if ch == "1" else 0 for ch in s])

    @classmethod
    def from_bytes_lsb(cls, data: bytes, n: int) -> "BitVector":
        if len(data) != (n + 7) // 8:
            raise ValueError("byte length does not match bit length")
        return cls.from_int(int.from_bytes(data, "little"), n)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, p: float | None = None) -> "BitVector":
        return random_matrix(1, n, rng, p=p).row(0)

    # ---- views

    @property
    def words(self) -> np.ndarray:
        return self._words

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._n:
            raise IndexError(i)
        return (int(self._words[i // WORD]) >> (i % WORD)) & 1

    def to_int(self) -> int:
        return int.from_bytes(self._words.astype("<u8", copy=False).tobytes(), "little")

    def to01(self) -> str:
        return "".join("1" if b else "0" for b in self.bits())

    def bits(self) -> np.ndarray:
        return _unpack_bit_rows(self._words, self._n)

    def to_bytes_lsb(self) -> bytes:
        return self.to_int().to_bytes((self._n + 7) // 8, "little")

    def count(self) -> int:
        return self.to_int().bit_count()

    def ones_indices(self) -> list[int]:
        return np.flatnonzero(self.bits()).tolist()

    # ---- operators

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self._n != other._n:
            raise ValueError("length mismatch")
        return BitVector(self._words ^ other._words, self._n)

    def __invert__(self) -> "BitVector":
        full = np.full(len(self._words), np.uint64(0xFFFFFFFFFFFFFFFF))
        out = self._words ^ full
        out[-1] &= np.uint64(_tail_mask(self._n))
        return BitVector(out, self._n)

    def with_bit(self, i: int, value: int) -> "BitVector":
        if not 0 <= i < self._n:
            raise IndexError(i)
        out = self._words.copy()
        if value:
            out[i // WORD] |= np.uint64(1 << (i % WORD))
        else:
            out[i // WORD] &= np.uint64(~(1 << (i % WORD)) & 0xFFFFFFFFFFFFFFFF)
        return BitVector(out, self._n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._n == other._n and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._n, self._words.tobytes()))

    def __repr__(self) -> str:
        if self._n <= 64:
            return f"BitVector('{self.to01()}')"
        return f"BitVector(len={self._n}, ones={self.count()})"


class BitMatrix:
    """Row-major bit matrix over GF(2)."""

    __slots__ = ("_data", "_rows", "_cols")

    def __init__(self, data: np.ndarray, rows: int, cols: int):
        data = np.ascontiguousarray(data, dtype=np.uint64)
        if data.shape != (rows, _nwords(cols)):
            raise ValueError("word buffer does not match shape")
        if rows:
            _check_canonical(data, cols)
        data.flags.writeable = False
        self._data = data
        self._rows = int(rows)
        self._cols = int(cols)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(np.zeros((rows, _nwords(cols)), dtype=np.uint64), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        bits = np.eye(n, dtype=np.uint8)
        return cls(_pack_bit_rows(bits), n, n)

    @classmethod
    def from_bit_rows(cls, rows) -> "BitMatrix":
        arr = np.asarray(rows, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d 0/1 array")
        return cls(_pack_bit_rows(arr), arr.shape[0], arr.shape[1])

    @classmethod
    def from_rows(cls, vectors) -> "BitMatrix":
        vectors = list(vectors)
        if not vectors:
            raise ValueError("no rows")
        n = len(vectors[0])
        if any(len(v) != n for v in vectors):
            raise ValueError("row length mismatch")
        data = np.stack([v.words for v in vectors])
        return cls(data, len(vectors), n)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def data(self) -> np.ndarray:
        return self._data

    def row(self, i: int) -> BitVector:
        if not 0 <= i < self._rows:
            raise IndexError(i)
        return BitVector(self._data[i].copy(), self._cols)

    def transpose(self) -> "BitMatrix":
        bits = _unpack_bit_rows(self._data, self._cols)
        return BitMatrix.from_bit_rows(bits.T)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (
            self._rows == other._rows
            and self._cols == other._cols
            and bool(np.array_equal(self._data, other._data))
        )

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self._rows}x{self._cols})"


@dataclass(frozen=True)
class LinearSystem:
    """A x = rhs over GF(2); one rhs bit per coefficient row."""

    coefficients: BitMatrix
    rhs: BitVector

    def __post_init__(self):
        if self.coefficients.rows != len(self.rhs):
            raise ValueError("rhs length must equal the number of rows")


class _Outcome:
    __slots__ = ("_name",)

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


NoSolution = _Outcome("NoSolution")
Underdetermined = _Outcome("Underdetermined")


def rank(m: BitMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return int(_kern.rank(m.data.copy(), m.rows, m.cols))


def matvec(m: BitMatrix, x: BitVector) -> BitVector:
    """Per-row inner products <row_i, x> as a vector of m.rows bits."""
    if len(x) != m.cols:
        raise ValueError("vector length must equal the number of columns")
    out = _kern.matvec(m.data, m.rows, x.words)
    return BitVector(out[: _nwords(m.rows)], m.rows)


def solve_unique(system: LinearSystem):
    """The unique x with A x = rhs, or NoSolution / Underdetermined."""
    m = system.coefficients
    a = m.data.copy()
    rhs_col = _pack_bit_rows(system.rhs.bits().reshape(-1, 1)) if m.rows else None
    rk, pivots = _kern.rref(a, m.rows, m.cols, rhs_col)
    for i in range(rk, m.rows):
        if rhs_col[i, 0]:
            return NoSolution
    if rk < m.cols:
        return Underdetermined
    xbits = np.zeros(m.cols, dtype=np.uint8)
    for j, col in enumerate(pivots):
        xbits[col] = int(rhs_col[j, 0]) & 1
    return BitVector.from_bits(xbits)


def count_satisfied(system: LinearSystem, x: BitVector) -> int:
    """How many equations of the system x satisfies."""
    if len(x) != system.coefficients.cols:
        raise ValueError("vector length must equal the number of columns")
    nrows = system.coefficients.rows
    got = _kern.matvec(system.coefficients.data, nrows, x.words)
    mism = got[: _nwords(nrows)] ^ system.rhs.words
    return nrows - _kern.popcount(mism)


def random_matrix(
    rows: int, cols: int, rng: np.random.Generator, p: float | None = None
) -> BitMatrix:
    """Random rows: Uniform when p is None, else iid Bernoulli(p).

    Deterministic for a given generator state; p must lie strictly inside
    (0, 1).
    """
    nw = _nwords(cols)
    if p is None:
        data = rng.integers(
            0, 0xFFFFFFFFFFFFFFFF, size=(rows, nw), dtype=np.uint64, endpoint=True
        )
        data[:, -1] &= np.uint64(_tail_mask(cols))
        if nw > _nwords(cols):
            data[:, _nwords(cols):] = 0
        return BitMatrix(data, rows, cols)
    if not 0.0 < p < 1.0:
        raise ValueError("Bernoulli density must lie strictly between 0 and 1")
    bits = (rng.random((rows, cols)) < p)
    return BitMatrix(_pack_bit_rows(bits), rows, cols)


def rank_failure_limit(d: int) -> float:
    """Limit probability that a uniform matrix with d extra rows misses
    full column rank: 1 - prod_{j>d}(1 - 2^-j).

    Evaluated with 64 factors through log1p/expm1; the truncated tail is
    below 2^-(d+64), far inside double precision.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    log_prod = 0.0
    for j in range(d + 1, d + 65):
        log_prod += math.log1p(-(2.0 ** -j))
    return -math.expm1(log_prod)


__all__ = [
    "WORD",
    "BitVector",
    "BitMatrix",
    "LinearSystem",
    "NoSolution",
    "Underdetermined",
    "rank",
    "matvec",
    "solve_unique",
    "count_satisfied",
    "random_matrix",
    "rank_failure_limit",
    "kernel_backend",
]

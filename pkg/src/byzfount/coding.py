"""Message blocking, coded-packet generation, and the packet wire format.

A message of n bits is split into m blocks of k bits each (zero padded).
Every packet carries one coding vector r of k bits together with the m
inner products of r against the blocks, so a single packet contributes
one linear equation to each of the m parallel systems.

Wire format, little endian throughout::

    magic    2 bytes   fc 0d
    version  1 byte    01
    kind     1 byte    0 = dense, 1 = index list, 2 = seed
    k        u32
    m        u32
    body     kind 0: ceil(k/8) bytes, r packed LSB first
             kind 1: u16 count, then count ascending u32 indices
             kind 2: u64 seed, u32 density numerator, u32 denominator
    payload  ceil(m/8) bytes, packed LSB first

Unused high bits in the final byte of a packed field must be zero.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import BinaryIO, Iterable, Sequence, Union

import numpy as np

from .gf2 import BitMatrix, BitVector, matvec

MAGIC = b"\xfc\x0d"
VERSION = 1

KIND_DENSE = 0
KIND_INDICES = 1
KIND_SEED = 2

_PREFIX = struct.Struct("<2sBBII")
_SEED_BODY = struct.Struct("<QII")

# densities are carried on the wire as u32/u32 rationals
_MAX_DEN = 2**31 - 1


class MalformedPacketError(ValueError):
    """Raised when a byte stream cannot be parsed as a packet.

    ``offset`` is the byte position at which the problem was detected.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


# --------------------------------------------------------------------- layout


@dataclass(frozen=True)
class MessageLayout:
    """Shape of a blocked message: m blocks of k bits, pad_bits of zero fill."""

    m: int
    k: int
    pad_bits: int

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be positive")
        if not 0 <= self.pad_bits < self.m:
            raise ValueError("pad_bits must lie in [0, m)")

    @property
    def n(self) -> int:
        return self.m * self.k

    @property
    def message_bits(self) -> int:
        return self.n - self.pad_bits


def split_message(message: BitVector, m: int) -> tuple[MessageLayout, list[BitVector]]:
    """Split a message into m equal blocks, zero padding the tail.

    The block length is k = ceil(len(message) / m); requesting more
    blocks than there are bits is an error.
    """
    n = len(message)
    if m < 1:
        raise ValueError("m must be positive")
    if m > n:
        raise ValueError(f"cannot split {n} bits into {m} blocks")
    k = -(-n // m)
    layout = MessageLayout(m=m, k=k, pad_bits=m * k - n)
    bits = np.zeros(m * k, dtype=np.uint8)
    bits[:n] = message.bits()
    blocks = [BitVector.from_bits(bits[i * k : (i + 1) * k]) for i in range(m)]
    return layout, blocks


def join_blocks(layout: MessageLayout, blocks: Sequence[BitVector]) -> BitVector:
    """Inverse of split_message: concatenate blocks and drop the padding."""
    if len(blocks) != layout.m:
        raise ValueError(f"expected {layout.m} blocks, got {len(blocks)}")
    if any(len(b) != layout.k for b in blocks):
        raise ValueError(f"every block must have {layout.k} bits")
    bits = np.concatenate([b.bits() for b in blocks])
    return BitVector.from_bits(bits[: layout.message_bits])


# --------------------------------------------------------------- distribution


def _bernoulli_bits(rng: np.random.Generator, shape, p: float) -> np.ndarray:
    return (rng.random(shape) < p).astype(np.uint8)


def _expand_seed(seed: int, k: int, num: int, den: int) -> BitVector:
    rng = np.random.Generator(np.random.PCG64(seed))
    return BitVector.from_bits(_bernoulli_bits(rng, k, num / den))


@dataclass(frozen=True)
class CodingDistribution:
    """Per-bit density of the coding vectors.

    ``uniform`` sets every bit independently with probability 1/2.
    ``log_sparse`` uses p = (1 + delta) * log2(k) / k and checks that p
    stays at least (log2(k) + c) / k away from both 0 and 1, the window
    in which sparse random systems still reach full rank with the usual
    2^-eps failure bound.  The density rides along in seed headers as a
    u32/u32 rational, so it is quantized once here.
    """

    kind: str
    k: int
    density_num: int
    density_den: int
    delta: float | None = None

    @classmethod
    def uniform(cls, k: int) -> "CodingDistribution":
        if k < 1:
            raise ValueError("k must be positive")
        return cls(kind="uniform", k=k, density_num=1, density_den=2)

    @classmethod
    def log_sparse(
        cls, k: int, delta: float = 1.0, c_window: float = 4.0
    ) -> "CodingDistribution":
        if k < 2:
            raise ValueError("log_sparse needs k >= 2")
        p = (1.0 + delta) * math.log2(k) / k
        margin = (math.log2(k) + c_window) / k
        if not margin <= p <= 1.0 - margin:
            raise ValueError(
                f"density {p:.4f} outside the admissible window "
                f"[{margin:.4f}, {1.0 - margin:.4f}] for k={k}"
            )
        frac = Fraction(p).limit_denominator(_MAX_DEN)
        return cls(
            kind="log",
            k=k,
            density_num=frac.numerator,
            density_den=frac.denominator,
            delta=delta,
        )

    @property
    def density(self) -> float:
        return self.density_num / self.density_den

    def sample(self, rng: np.random.Generator) -> BitVector:
        """Draw one coding vector, resampling the all-zero outcome."""
        while True:
            bits = _bernoulli_bits(rng, self.k, self.density)
            if bits.any():
                return BitVector.from_bits(bits)

    def sample_matrix(self, rows: int, rng: np.random.Generator) -> BitMatrix:
        """Draw many coding vectors at once; zero rows are redrawn."""
        bits = _bernoulli_bits(rng, (rows, self.k), self.density)
        for i in np.flatnonzero(~bits.any(axis=1)):
            while True:
                row = _bernoulli_bits(rng, self.k, self.density)
                if row.any():
                    bits[i] = row
                    break
        return BitMatrix.from_bit_rows(bits)


# -------------------------------------------------------------------- packets


@dataclass(frozen=True)
class DenseHeader:
    """The coding vector spelled out bit by bit."""

    r: BitVector


@dataclass(frozen=True)
class IndexListHeader:
    """Positions of the one bits, strictly ascending."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly ascending")
        if any(i < 0 for i in self.indices):
            raise ValueError("indices must be nonnegative")


@dataclass(frozen=True)
class SeedHeader:
    """A PCG64 seed plus the rational density used to expand it."""

    seed: int
    density_num: int
    density_den: int

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 < self.density_num < self.density_den:
            raise ValueError("density must lie strictly between 0 and 1")


Header = Union[DenseHeader, IndexListHeader, SeedHeader]


@dataclass(frozen=True)
class Packet:
    """One coded packet: a header describing r plus m payload bits."""

    header: Header
    payload: BitVector
    k: int
    m: int

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ValueError("k and m must be positive")
        if len(self.payload) != self.m:
            raise ValueError(f"payload must have m={self.m} bits")
        h = self.header
        if isinstance(h, DenseHeader) and len(h.r) != self.k:
            raise ValueError(f"dense header must have k={self.k} bits")
        if isinstance(h, IndexListHeader) and h.indices and h.indices[-1] >= self.k:
            raise ValueError("index out of range for k")

    @property
    def form(self) -> str:
        if isinstance(self.header, DenseHeader):
            return "dense"
        if isinstance(self.header, IndexListHeader):
            return "indices"
        return "seed"


def expand_header(packet: Packet) -> BitVector:
    """Recover the k-bit coding vector from whichever header form is present.

    Seed expansion is deterministic: the same header always yields the
    same vector.
    """
    h = packet.header
    if isinstance(h, DenseHeader):
        return h.r
    if isinstance(h, IndexListHeader):
        v = np.zeros(packet.k, dtype=np.uint8)
        v[list(h.indices)] = 1
        return BitVector.from_bits(v)
    return _expand_seed(h.seed, packet.k, h.density_num, h.density_den)


def generate_packet(
    blocks: Union[BitMatrix, Sequence[BitVector]],
    dist: CodingDistribution,
    header_form: str,
    rng: np.random.Generator,
) -> Packet:
    """Draw a coding vector from dist and emit one packet over the blocks.

    ``blocks`` may be a list of k-bit vectors or a prebuilt m-by-k
    matrix (one row per block); pass the matrix when generating many
    packets from the same message.
    """
    mat = blocks if isinstance(blocks, BitMatrix) else BitMatrix.from_rows(blocks)
    if mat.cols != dist.k:
        raise ValueError(f"blocks have {mat.cols} bits but dist expects {dist.k}")
    if header_form == "seed":
        while True:
            seed = int(rng.integers(0, 2**64, dtype=np.uint64))
            r = _expand_seed(seed, dist.k, dist.density_num, dist.density_den)
            if r.count() > 0:
                break
        header: Header = SeedHeader(seed, dist.density_num, dist.density_den)
    else:
        r = dist.sample(rng)
        if header_form == "dense":
            header = DenseHeader(r)
        elif header_form == "indices":
            header = IndexListHeader(tuple(r.ones_indices()))
        else:
            raise ValueError(f"unknown header form {header_form!r}")
    return Packet(header=header, payload=matvec(mat, r), k=dist.k, m=mat.rows)


# ---------------------------------------------------------------- serialization


def serialize_packet(packet: Packet) -> bytes:
    if packet.k >= 2**32 or packet.m >= 2**32:
        raise ValueError("k and m must fit in 32 bits")
    h = packet.header
    if isinstance(h, DenseHeader):
        kind, body = KIND_DENSE, h.r.to_bytes_lsb()
    elif isinstance(h, IndexListHeader):
        if len(h.indices) >= 2**16:
            raise ValueError("too many indices for the index-list form")
        kind = KIND_INDICES
        body = struct.pack(f"<H{len(h.indices)}I", len(h.indices), *h.indices)
    else:
        kind = KIND_SEED
        body = _SEED_BODY.pack(h.seed, h.density_num, h.density_den)
    prefix = _PREFIX.pack(MAGIC, VERSION, kind, packet.k, packet.m)
    return prefix + body + packet.payload.to_bytes_lsb()


def _need(buf: bytes, offset: int, n: int, what: str) -> None:
    if offset + n > len(buf):
        raise MalformedPacketError(f"truncated {what}", len(buf))


def _packed_bits(buf: bytes, offset: int, nbits: int, what: str) -> BitVector:
    nbytes = (nbits + 7) // 8
    _need(buf, offset, nbytes, what)
    try:
        return BitVector.from_bytes_lsb(buf[offset : offset + nbytes], nbits)
    except ValueError:
        raise MalformedPacketError(f"stray bits beyond length in {what}", offset) from None


def deserialize_packet(buf: bytes, offset: int = 0) -> tuple[Packet, int]:
    """Parse one packet starting at ``offset``; return it and the next offset."""
    _need(buf, offset, _PREFIX.size, "packet prefix")
    magic, version, kind, k, m = _PREFIX.unpack_from(buf, offset)
    if magic != MAGIC:
        raise MalformedPacketError("bad magic", offset)
    if version != VERSION:
        raise MalformedPacketError(f"unsupported version {version}", offset + 2)
    if kind not in (KIND_DENSE, KIND_INDICES, KIND_SEED):
        raise MalformedPacketError(f"unknown header kind {kind}", offset + 3)
    if k == 0:
        raise MalformedPacketError("k must be positive", offset + 4)
    if m == 0:
        raise MalformedPacketError("m must be positive", offset + 8)
    pos = offset + _PREFIX.size

    header: Header
    if kind == KIND_DENSE:
        r = _packed_bits(buf, pos, k, "dense header")
        header = DenseHeader(r)
        pos += (k + 7) // 8
    elif kind == KIND_INDICES:
        _need(buf, pos, 2, "index count")
        (count,) = struct.unpack_from("<H", buf, pos)
        if count > k:
            raise MalformedPacketError(f"{count} indices but k={k}", pos)
        pos += 2
        _need(buf, pos, 4 * count, "index list")
        indices = struct.unpack_from(f"<{count}I", buf, pos)
        prev = -1
        for j, idx in enumerate(indices):
            if idx >= k:
                raise MalformedPacketError(f"index {idx} out of range for k={k}", pos + 4 * j)
            if idx <= prev:
                raise MalformedPacketError("indices not strictly ascending", pos + 4 * j)
            prev = idx
        header = IndexListHeader(tuple(indices))
        pos += 4 * count
    else:
        _need(buf, pos, _SEED_BODY.size, "seed header")
        seed, num, den = _SEED_BODY.unpack_from(buf, pos)
        if not 0 < num < den:
            raise MalformedPacketError("density must lie strictly between 0 and 1", pos + 8)
        header = SeedHeader(seed, num, den)
        pos += _SEED_BODY.size

    payload = _packed_bits(buf, pos, m, "payload")
    pos += (m + 7) // 8
    return Packet(header=header, payload=payload, k=k, m=m), pos


def parse_packets(buf: bytes) -> list[Packet]:
    """Parse a stream of concatenated packets, consuming every byte."""
    out = []
    offset = 0
    while offset < len(buf):
        p, offset = deserialize_packet(buf, offset)
        out.append(p)
    return out


def write_packets(fp: BinaryIO, packets: Iterable[Packet]) -> int:
    """Serialize packets to a binary file object; returns bytes written."""
    total = 0
    for p in packets:
        blob = serialize_packet(p)
        fp.write(blob)
        total += len(blob)
    return total


def read_packets(fp: BinaryIO) -> list[Packet]:
    return parse_packets(fp.read())

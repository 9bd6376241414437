"""Corruption-bounded Byzantine channel and the concrete attacks.

The channel delivers every packet in order and may alter content but
never drops or reorders anything. A rational bound c caps how much of
the stream may be corrupted: under the default "prefix" scope every
arrival-order prefix of length i >= 4 contains at most floor(c*i)
corrupted packets; under the "final" scope only the total count against
floor(c*n) is enforced.

Adversaries differ along two axes. Offline ones see the whole stream
before choosing victims, online ones decide packet by packet from the
past only. Selective ones pick exactly the packets their strategy
cares about; uniform ones pick victims at random regardless of content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .coding import DenseHeader, IndexListHeader, Packet, expand_header
from .gf2 import BitVector
from .lt import LtPacket

_SCOPES = ("prefix", "final")

# below this prefix length the floor(c*i) cap would forbid corruption
# outright for every admissible c, so the window is clamped
_MIN_WINDOW = 4


def _as_fraction(c) -> Fraction:
    if isinstance(c, float):
        return Fraction(c).limit_denominator(10**9)
    return Fraction(c)


@dataclass(frozen=True)
class CBound:
    """Corruption budget: at most a c fraction of any counted window."""

    c: Fraction
    scope: str = "prefix"

    def __post_init__(self):
        object.__setattr__(self, "c", _as_fraction(self.c))
        if not 0 < self.c <= Fraction(1, 3):
            raise ValueError(f"c must lie in (0, 1/3], got {self.c}")
        if self.scope not in _SCOPES:
            raise ValueError(f"scope must be one of {_SCOPES}")

    def prefix_budget(self, i: int) -> int:
        return math.floor(self.c * max(i, _MIN_WINDOW)) if i >= _MIN_WINDOW else 0

    def total_budget(self, n: int) -> int:
        return math.floor(self.c * n)

    def fits(self, corrupted: int, position: int, n: int) -> bool:
        """Would a running total of ``corrupted`` packets, the latest at
        1-based ``position``, still respect the bound?"""
        if self.scope == "final":
            return corrupted <= self.total_budget(n)
        return corrupted <= math.floor(self.c * max(position, _MIN_WINDOW))


AnyPacket = Union[Packet, LtPacket]


def _payload_of(p: AnyPacket) -> BitVector:
    return p.payload if isinstance(p, Packet) else p.value


def _with_payload(p: AnyPacket, payload: BitVector) -> AnyPacket:
    if isinstance(p, Packet):
        return Packet(p.header, payload, p.k, p.m)
    return LtPacket(p.neighbors, payload)


def _degree_of(p: AnyPacket) -> int:
    """Neighbor count: set size for LT packets, weight of the expanded
    coding vector for wire packets (support of r = neighbor set)."""
    return p.degree if isinstance(p, LtPacket) else expand_header(p).count()


@dataclass(frozen=True)
class PayloadFlip:
    """Corrupt payload bits; headers untouched.

    Policy "complement" flips every bit, "random" flips a random
    nonempty subset, so a corrupted packet always differs from the
    original.
    """

    mask_policy: str = "complement"

    def __post_init__(self):
        if self.mask_policy not in ("complement", "random"):
            raise ValueError("mask_policy must be 'complement' or 'random'")

    def wants(self, p: AnyPacket) -> bool:
        return True

    def corrupt(self, p: AnyPacket, rng: np.random.Generator) -> Optional[AnyPacket]:
        payload = _payload_of(p)
        if self.mask_policy == "complement":
            return _with_payload(p, ~payload)
        while True:
            mask = BitVector.random(len(payload), rng)
            if mask.count():
                return _with_payload(p, payload ^ mask)


@dataclass(frozen=True)
class VanishingSymbol:
    """Erase one symbol from packet headers, leaving payloads stale.

    On wire packets the target is a coding-vector position: the bit is
    cleared in place for dense and index-list headers, while a seed
    header is rewritten as an index list (a seed cannot express an
    edited expansion).
    """

    target: int

    def wants(self, p: AnyPacket) -> bool:
        if isinstance(p, LtPacket):
            return self.target in p.neighbors
        return 0 <= self.target < p.k and bool(expand_header(p)[self.target])

    def corrupt(self, p: AnyPacket, rng: np.random.Generator) -> Optional[AnyPacket]:
        if not self.wants(p):
            return None
        if isinstance(p, LtPacket):
            remaining = p.neighbors - {self.target}
            if not remaining:
                # a packet cannot be delivered with an empty neighbor
                # set; the channel passes it through instead
                return None
            return LtPacket(remaining, p.value)
        r = expand_header(p).with_bit(self.target, 0)
        if not r.count():
            return None
        if isinstance(p.header, DenseHeader):
            header = DenseHeader(r)
        else:
            header = IndexListHeader(tuple(r.ones_indices()))
        return Packet(header, p.payload, p.k, p.m)


@dataclass(frozen=True)
class OddPackets:
    """Complement the payload of every odd-degree packet."""

    def wants(self, p: AnyPacket) -> bool:
        return _degree_of(p) % 2 == 1

    def corrupt(self, p: AnyPacket, rng: np.random.Generator) -> Optional[AnyPacket]:
        if not self.wants(p):
            return None
        return _with_payload(p, ~_payload_of(p))


Strategy = Union[PayloadFlip, VanishingSymbol, OddPackets]

_KNOWLEDGE = ("online", "offline")
_SELECTION = ("uniform", "selective")


@dataclass(frozen=True)
class AdversarySpec:
    knowledge: str
    selection: str
    bound: CBound
    strategy: Strategy

    def __post_init__(self):
        if self.knowledge not in _KNOWLEDGE:
            raise ValueError(f"knowledge must be one of {_KNOWLEDGE}")
        if self.selection not in _SELECTION:
            raise ValueError(f"selection must be one of {_SELECTION}")


def transmit(
    packets: Sequence[AnyPacket], spec: AdversarySpec, rng: np.random.Generator
) -> list[tuple[AnyPacket, bool]]:
    """Deliver the stream through the adversarial channel.

    Returns (packet, corrupted) pairs in the original order; the flags
    are ground truth for scoring and are never shown to decoders. An
    attempt that the budget forbids, or that the strategy cannot apply
    to the packet, passes the packet through unmodified.
    """
    n = len(packets)
    desired: Optional[set] = None
    if spec.knowledge == "offline":
        if spec.selection == "selective":
            desired = {i for i, p in enumerate(packets) if spec.strategy.wants(p)}
        else:
            budget = spec.bound.total_budget(n)
            desired = {int(i) for i in rng.permutation(n)[:budget]}

    out: list[tuple[AnyPacket, bool]] = []
    corrupted = 0
    for pos, p in enumerate(packets, start=1):
        if desired is not None:
            attempt = (pos - 1) in desired
        elif spec.selection == "selective":
            attempt = spec.strategy.wants(p)
        else:
            attempt = rng.random() < float(spec.bound.c)
        if attempt and spec.bound.fits(corrupted + 1, pos, n):
            q = spec.strategy.corrupt(p, rng)
            if q is not None:
                out.append((q, True))
                corrupted += 1
                continue
        out.append((p, False))
    return out


# ----------------------------------------------------------- whole-stream ops


def vanishing_symbol_attack(
    packets: Sequence[LtPacket], target: int
) -> tuple[list[LtPacket], int]:
    """Remove every trace of one symbol from the headers.

    Payloads are untouched, so edited packets become inconsistent with
    their headers; packets left with no neighbors are dropped. Returns
    the modified stream and the number of packets edited.
    """
    out = []
    edits = 0
    for p in packets:
        if target in p.neighbors:
            edits += 1
            remaining = p.neighbors - {target}
            if remaining:
                out.append(LtPacket(remaining, p.value))
        else:
            out.append(p)
    return out, edits


def odd_packets_attack(packets: Sequence[LtPacket]) -> list[LtPacket]:
    """Complement the payload of every odd-degree packet."""
    return [
        LtPacket(p.neighbors, ~p.value) if p.degree % 2 == 1 else p for p in packets
    ]


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    required: int
    budget: int


def attack_feasible(packets: Sequence[AnyPacket], spec: AdversarySpec) -> Feasibility:
    """Does the strategy's full victim set fit within floor(c*n)?"""
    if isinstance(spec.strategy, PayloadFlip):
        raise ValueError("feasibility is defined for targeted strategies only")
    required = sum(spec.strategy.wants(p) for p in packets)
    budget = spec.bound.total_budget(len(packets))
    return Feasibility(required <= budget, required, budget)

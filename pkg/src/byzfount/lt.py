"""Baseline LT fountain code: soliton degree distributions, the xor
encoder, and the peeling (belief-propagation) decoder.

This is the attack target, not the resilient code: the decoder trusts
every packet, so header or payload corruption propagates into the
output. The decoder records the tell-tale signs of corruption it can
see (packets peeled down to zero neighbors with a nonzero leftover
value) as inconsistency diagnostics.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .gf2 import BitVector


class DegreeDistribution:
    """Probability law for packet degrees over symbols 1..k."""

    k: int

    def probabilities(self) -> np.ndarray:
        """Length-k array; entry i-1 is the probability of degree i."""
        return self._probs

    def _finalize(self, probs: np.ndarray) -> None:
        if probs.min() < 0:
            raise ValueError("degree probabilities must be nonnegative")
        probs = probs / probs.sum()
        probs.flags.writeable = False
        self._probs = probs


class IdealSoliton(DegreeDistribution):
    """P[1] = 1/k and P[i] = 1/(i(i-1)) for 2 <= i <= k."""

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("soliton distributions need k >= 2")
        self.k = k
        i = np.arange(1, k + 1, dtype=np.float64)
        probs = 1.0 / (i * (i - 1.0) + (i == 1))  # guard the i=1 cell
        probs[0] = 1.0 / k
        self._finalize(probs)


class RobustSoliton(DegreeDistribution):
    """Ideal Soliton plus the extra mass tau with a spike near k/R.

    R = c_rs * ln(k/delta) * sqrt(k); tau(i) = R/(ik) below the spike
    and R*ln(R/delta)/k at the spike index round(k/R). The result is
    normalized.
    """

    def __init__(self, k: int, c_rs: float = 0.1, delta: float = 0.05):
        if k < 2:
            raise ValueError("soliton distributions need k >= 2")
        if c_rs <= 0:
            raise ValueError("c_rs must be positive")
        if not 0 < delta < 1:
            raise ValueError("delta must be a probability in (0, 1)")
        self.k = k
        self.c_rs = c_rs
        self.delta = delta
        self.r_value = c_rs * np.log(k / delta) * np.sqrt(k)
        spike = int(round(k / self.r_value))
        if not 1 <= spike <= k:
            raise ValueError(f"spike index {spike} falls outside 1..{k}")
        self.spike = spike
        rho = IdealSoliton(k).probabilities().copy()
        tau = np.zeros(k)
        i = np.arange(1, spike, dtype=np.float64)
        tau[: spike - 1] = self.r_value / (i * k)
        tau[spike - 1] = self.r_value * np.log(self.r_value / delta) / k
        self._finalize(rho + tau)


class FixedDegree(DegreeDistribution):
    """All mass on a single degree; handy for edge-case tests."""

    def __init__(self, k: int, degree: int):
        if k < 1 or not 1 <= degree <= k:
            raise ValueError("need 1 <= degree <= k")
        self.k = k
        probs = np.zeros(k)
        probs[degree - 1] = 1.0
        self._finalize(probs)


def sample_degrees(
    dist: DegreeDistribution, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw n degrees in one vectorized call."""
    return rng.choice(dist.k, size=n, p=dist.probabilities()) + 1


def sample_degree(dist: DegreeDistribution, rng: np.random.Generator) -> int:
    return int(rng.choice(dist.k, p=dist.probabilities())) + 1


def odd_degree_fraction(
    dist: DegreeDistribution, trials: int, rng: np.random.Generator
) -> float:
    """Empirical fraction of odd degrees over the given number of draws."""
    if trials < 1:
        raise ValueError("trials must be positive")
    return float(np.mean(sample_degrees(dist, trials, rng) % 2))


# ------------------------------------------------------------------- packets


@dataclass(frozen=True)
class LtPacket:
    """A neighbor set and the xor of those symbols' values."""

    neighbors: frozenset
    value: BitVector

    def __post_init__(self):
        object.__setattr__(self, "neighbors", frozenset(self.neighbors))
        if not self.neighbors:
            raise ValueError("a packet must have at least one neighbor")

    @property
    def degree(self) -> int:
        return len(self.neighbors)


def lt_encode(
    symbols: Sequence[BitVector], dist: DegreeDistribution, rng: np.random.Generator
) -> LtPacket:
    """Sample a degree, pick that many symbols uniformly, xor them."""
    k = len(symbols)
    if k == 0:
        raise ValueError("need at least one symbol")
    if k != dist.k:
        raise ValueError(f"distribution is over {dist.k} symbols, got {k}")
    d = sample_degree(dist, rng)
    chosen = rng.choice(k, size=d, replace=False)
    value = symbols[int(chosen[0])]
    for j in chosen[1:]:
        value = value ^ symbols[int(j)]
    return LtPacket(frozenset(int(j) for j in chosen), value)


# ------------------------------------------------------------------ decoding


@dataclass(frozen=True)
class Inconsistency:
    """A packet peeled to zero neighbors with a nonzero leftover value.

    Impossible on clean inputs; evidence of corruption.
    """

    packet_index: int
    residual: BitVector


@dataclass(frozen=True)
class Decoded:
    symbols: list
    inconsistencies: list = field(default_factory=list)


@dataclass(frozen=True)
class Stalled:
    decoded: dict
    unresolved: frozenset
    residual: list
    inconsistencies: list = field(default_factory=list)


def bp_decode(
    packets: Sequence[LtPacket], k: int
) -> Union[Decoded, Stalled]:
    """Peel degree-1 packets until everything resolves or no such packet
    remains.

    Newly degree-1 packets join a FIFO queue, so the schedule is
    deterministic in input order. On a stall the partial decode, the
    unresolved symbol set, and the residual packets (for forensics) are
    returned.
    """
    nbrs = [set(p.neighbors) for p in packets]
    vals = [p.value for p in packets]
    sym_pkts: dict[int, set] = {}
    for idx, s in enumerate(nbrs):
        for j in s:
            if not 0 <= j < k:
                raise ValueError(f"neighbor {j} out of range for k={k}")
            sym_pkts.setdefault(j, set()).add(idx)

    inconsistencies = []
    queue = deque(i for i, s in enumerate(nbrs) if len(s) == 1)
    decoded: dict[int, BitVector] = {}

    while queue:
        idx = queue.popleft()
        if len(nbrs[idx]) != 1:
            continue  # peeled further while waiting
        (s,) = nbrs[idx]
        value = vals[idx]
        decoded[s] = value
        for q in sym_pkts.pop(s, ()):
            vals[q] = vals[q] ^ value
            nbrs[q].discard(s)
            if len(nbrs[q]) == 1:
                queue.append(q)
            elif not nbrs[q] and vals[q].count():
                inconsistencies.append(Inconsistency(q, vals[q]))

    if len(decoded) == k:
        return Decoded([decoded[i] for i in range(k)], inconsistencies)
    residual = [
        LtPacket(frozenset(s), vals[i]) for i, s in enumerate(nbrs) if s
    ]
    return Stalled(
        decoded=decoded,
        unresolved=frozenset(j for j in range(k) if j not in decoded),
        residual=residual,
        inconsistencies=inconsistencies,
    )

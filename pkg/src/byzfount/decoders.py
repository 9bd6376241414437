"""Corruption-resilient decoders and their packet-count planners.

Three decoding strategies recover a block from packets of which up to f
(or a b*k fraction chosen selectively) carry corrupted payloads:

* majority: split the stream greedily into 2f+1 disjoint full-rank
  sets, solve each, take the plurality answer.
* exhaustive: enumerate all 2^k candidate blocks and keep the one
  satisfying at least the planned threshold of equations.
* randomized: repeatedly solve a random (k+epsilon)-subset and accept
  a solution that satisfies the threshold over the whole collection.

Planners size the packet collection so that, within the stated failure
bounds, the true block is the unique candidate reaching the acceptance
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from ._kernels import impl as _kern
from .coding import Packet, expand_header
from .gf2 import (
    BitMatrix,
    BitVector,
    LinearSystem,
    _nwords,
    _pack_bit_rows,
    _unpack_bit_rows,
    count_satisfied,
)
from .lt import Decoded, LtPacket, bp_decode

EXHAUSTIVE_K_CEILING = 24


# ------------------------------------------------------------------ planning


def binary_entropy(p: float) -> float:
    """Entropy of a Bernoulli(p) variable in bits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def selective_exponent(a: float, b: float) -> float:
    """a - b - 1 - a*h(b/a): positive values make the selective plan's
    failure probability decay as 2^(-k*exponent)."""
    if b <= 0 or a <= b:
        raise ValueError("need a > b > 0")
    return a - b - 1.0 - a * binary_entropy(b / a)


@dataclass(frozen=True)
class DecodePlan:
    """How many packets to collect and when to accept a candidate."""

    model: str  # "uniform" | "selective"
    k: int
    epsilon: int
    required_packets: int
    threshold: int
    f: Optional[int] = None
    a: Optional[float] = None
    b: Optional[float] = None

    @property
    def failure_bound(self) -> float:
        """Planner's residual failure probability."""
        if self.model == "uniform":
            return 2.0 ** (-self.epsilon)
        return 2.0 ** (-self.k * selective_exponent(self.a, self.b))

    @property
    def implied_c(self) -> Fraction:
        if self.model != "uniform":
            raise ValueError("implied_c applies to uniform plans")
        return Fraction(self.f, self.required_packets)


def plan_uniform(k: int, f: int, epsilon: int) -> DecodePlan:
    """Plan for up to f corrupted packets placed without knowledge of
    the coding vectors: collect k+2f+epsilon, accept at k+f+epsilon."""
    if k < 1:
        raise ValueError("k must be positive")
    if not 0 <= f < k:
        raise ValueError("the uniform-adversary plan needs f < k")
    if epsilon < 1:
        raise ValueError("epsilon must be at least 1")
    return DecodePlan(
        model="uniform",
        k=k,
        epsilon=epsilon,
        required_packets=k + 2 * f + epsilon,
        threshold=k + f + epsilon,
        f=f,
    )


def plan_selective(k: int, b: float, grid_step: float = 0.5) -> DecodePlan:
    """Plan against an adversary that corrupts b*k packets of its
    choice: find the smallest a on the grid with a positive exponent,
    collect (a+b)k packets, accept at a*k satisfied equations."""
    if k < 1:
        raise ValueError("k must be positive")
    if b <= 0:
        raise ValueError("b must be positive")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    n = math.floor(b / grid_step) + 1
    while True:
        a = n * grid_step
        if a > b and selective_exponent(a, b) > 0:
            break
        n += 1
    return DecodePlan(
        model="selective",
        k=k,
        epsilon=0,
        required_packets=math.ceil((a + b) * k),
        threshold=math.ceil(a * k),
        a=a,
        b=b,
    )


def randomized_g(k: int, f: int, epsilon: int, b_param: float = 2.0) -> int:
    """Oversampling count for the randomized decoder: the smallest
    integer strictly above f(k+epsilon)/log2(b_param), which keeps the
    chance of drawing a corruption-free subset above 1/b_param."""
    if b_param <= 1.0:
        raise ValueError("b_param must exceed 1")
    x = f * (k + epsilon) / math.log2(b_param)
    return math.floor(x) + 1


def majority_applicable(c, k: int, n: int) -> bool:
    """Whether a c-bounded stream of n packets can feed the majority
    decoder: c <= 1/(2k) - 1/(2n)."""
    frac = Fraction(c).limit_denominator(10**9) if isinstance(c, float) else Fraction(c)
    return frac <= Fraction(1, 2 * k) - Fraction(1, 2 * n)


# ------------------------------------------------------------------ outcomes


@dataclass
class DecodeStats:
    iterations: int = 0
    satisfied: Optional[int] = None
    sets_formed: int = 0
    solve_steps: int = 0


@dataclass
class DecodeOutcome:
    ok: bool
    blocks: Optional[list]
    reason: Optional[str]
    stats: DecodeStats
    hint: Optional[BitVector] = None
    multiplicity: Optional[int] = None


def _recovered(blocks, stats, multiplicity=None) -> DecodeOutcome:
    return DecodeOutcome(True, blocks, None, stats, multiplicity=multiplicity)


def _failed(reason, stats, hint=None) -> DecodeOutcome:
    return DecodeOutcome(False, None, reason, stats, hint=hint)


# ------------------------------------------------------------------ plumbing


def _stream_shape(packets: Sequence[Packet]) -> tuple[int, int]:
    if not packets:
        raise ValueError("need at least one packet")
    k, m = packets[0].k, packets[0].m
    if any(p.k != k or p.m != m for p in packets):
        raise ValueError("packets disagree on k or m")
    return k, m


def coefficient_matrix(packets: Sequence[Packet]) -> BitMatrix:
    """Expanded coding vectors, one row per packet."""
    k, _ = _stream_shape(packets)
    return BitMatrix.from_rows([expand_header(p) for p in packets])


def payload_column(packets: Sequence[Packet], block: int) -> BitVector:
    """The right-hand side for one block: payload bit `block` of every
    packet, in arrival order."""
    _, m = _stream_shape(packets)
    if not 0 <= block < m:
        raise ValueError(f"block must lie in [0, {m})")
    return BitVector.from_bits(
        np.fromiter((p.payload[block] for p in packets), dtype=np.uint8)
    )


def _payload_rows(packets: Sequence[Packet]) -> np.ndarray:
    """Packed m-bit payload rows, one per packet, for multi-block solves."""
    return _pack_bit_rows(np.stack([p.payload.bits() for p in packets]))


def _payload_columns_packed(packets: Sequence[Packet], m: int) -> np.ndarray:
    """m packed rows of length len(packets): row b holds block b's
    right-hand side across the stream."""
    bits = np.stack([p.payload.bits() for p in packets])  # (n, m)
    return _pack_bit_rows(np.ascontiguousarray(bits.T))


def _solve_subset(
    coeff: np.ndarray, nrows: int, k: int, rhs_rows: np.ndarray, m: int
) -> Optional[list[BitVector]]:
    """Unique solution per block for the given rows, or None when the
    subset is rank-deficient or inconsistent."""
    a = coeff.copy()
    r = rhs_rows.copy()
    rk, pivots = _kern.rref(a, nrows, k, r)
    if rk < k:
        return None
    for i in range(rk, nrows):
        if r[i].any():
            return None
    bits = _unpack_bit_rows(r[:rk], m)
    sols = np.zeros((m, k), dtype=np.uint8)
    for j, col in enumerate(pivots):
        sols[:, col] = bits[j, :]
    return [BitVector.from_bits(sols[b]) for b in range(m)]


# ---------------------------------------------------------------- exhaustive


def _scan(packets, blocks_wanted: list[int], threshold: int, ceiling: int):
    """One Gray-code walk over 2^k candidates, scoring the chosen blocks
    simultaneously; returns per-block (best_count, best_x, n_at)."""
    k, m = _stream_shape(packets)
    if k > ceiling:
        raise ValueError(
            f"exhaustive search over 2^{k} candidates exceeds the ceiling "
            f"k={ceiling}; use randomized_decode"
        )
    n = len(packets)
    if not 1 <= threshold <= n:
        raise ValueError("threshold must lie in [1, packet count]")
    cols = coefficient_matrix(packets).transpose().data
    all_rhs = _payload_columns_packed(packets, m)
    rhs = np.ascontiguousarray(all_rhs[blocks_wanted])
    return _kern.exhaustive_scan(cols, rhs, n, k, threshold)


def exhaustive_decode(
    packets: Sequence[Packet],
    block: int,
    threshold: int,
    ceiling: int = EXHAUSTIVE_K_CEILING,
) -> DecodeOutcome:
    """Enumerate every candidate block value; accept the unique one
    satisfying at least `threshold` of the collected equations.

    Fails with "Ambiguous" when several candidates qualify (possible
    only when the plan's failure event occurred) and "NoCandidate" when
    none does.
    """
    k, m = _stream_shape(packets)
    if not 0 <= block < m:
        raise ValueError(f"block must lie in [0, {m})")
    best_count, best_x, n_at = _scan(packets, [block], threshold, ceiling)
    stats = DecodeStats(iterations=2**k, satisfied=int(best_count[0]), solve_steps=1)
    if n_at[0] == 0:
        return _failed("NoCandidate", stats)
    if n_at[0] > 1:
        return _failed("Ambiguous", stats, hint=BitVector.from_int(int(best_x[0]), k))
    return _recovered([BitVector.from_int(int(best_x[0]), k)], stats)


# ---------------------------------------------------------------- randomized


def _default_cap(k: int, f: int, epsilon: int, g: int) -> int:
    p_k = 1.0 if f == 0 else math.exp(-f * (k + epsilon) / g)
    p_eps = 1.0 - 2.0 ** (-epsilon)
    return math.ceil(64.0 / (p_k * p_eps))


def randomized_decode(
    packets: Sequence[Packet],
    block: int,
    k: int,
    f: int,
    epsilon: int,
    g: int,
    rng: np.random.Generator,
    max_iterations: Optional[int] = None,
) -> DecodeOutcome:
    """Sample (k+epsilon)-subsets until one solves uniquely to a value
    satisfying at least k+f+epsilon of all collected equations.

    Needs g+k+f+epsilon packets so that a sampled subset avoids all f
    corruptions often enough; gives up with "IterationBudget" after the
    cap, which defaults to 64x the expected iteration count.
    """
    pk, m = _stream_shape(packets)
    if pk != k:
        raise ValueError(f"packets carry k={pk}, expected {k}")
    if not 0 <= block < m:
        raise ValueError(f"block must lie in [0, {m})")
    n = len(packets)
    need = g + k + f + epsilon
    if n < need:
        raise ValueError(f"need at least g+k+f+epsilon = {need} packets, got {n}")
    threshold = k + f + epsilon
    coeff = coefficient_matrix(packets)
    rhs_vec = payload_column(packets, block)
    rhs_rows = _pack_bit_rows(rhs_vec.bits().reshape(-1, 1))
    system = LinearSystem(coeff, rhs_vec)
    sample_size = k + epsilon
    cap = max_iterations if max_iterations is not None else _default_cap(k, f, epsilon, g)

    for it in range(1, cap + 1):
        idx = np.sort(rng.choice(n, size=sample_size, replace=False))
        sols = _solve_subset(
            coeff.data[idx], sample_size, k, rhs_rows[idx], 1
        )
        if sols is None:
            continue
        x = sols[0]
        sat = count_satisfied(system, x)
        if sat >= threshold:
            stats = DecodeStats(iterations=it, satisfied=sat, solve_steps=it)
            return _recovered([x], stats)
    return _failed("IterationBudget", DecodeStats(iterations=cap, solve_steps=cap))


# ------------------------------------------------------------------ majority


def _greedy_sets(coeff: BitMatrix, k: int, wanted: int) -> tuple[list[list[int]], int]:
    """Split packet indices into disjoint sets of k independent rows.

    Streams rows in arrival order, keeping a running elimination; rows
    that do not raise the current set's rank are skipped. Returns the
    sets (at most `wanted`) and the count formed.
    """
    row_ints = [int.from_bytes(coeff.data[i].astype("<u8").tobytes(), "little")
                for i in range(coeff.rows)]
    sets: list[list[int]] = []
    current: list[int] = []
    basis: dict[int, int] = {}
    for i, v in enumerate(row_ints):
        while v:
            p = v.bit_length() - 1
            if p not in basis:
                break
            v ^= basis[p]
        if not v:
            continue
        basis[p] = v
        current.append(i)
        if len(current) == k:
            sets.append(current)
            current = []
            basis = {}
            if len(sets) == wanted:
                break
    return sets, len(sets)


def majority_decode(
    packets: Sequence[Packet],
    block: int,
    f: int,
    epsilon: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> DecodeOutcome:
    """Solve 2f+1 disjoint full-rank packet sets and return the
    plurality answer, provided it reaches multiplicity f+1.

    The set construction is greedy and deterministic in arrival order,
    so the rng parameter is accepted for interface uniformity but never
    consulted.
    """
    k, m = _stream_shape(packets)
    if not 0 <= block < m:
        raise ValueError(f"block must lie in [0, {m})")
    if f < 0:
        raise ValueError("f must be nonnegative")
    coeff = coefficient_matrix(packets)
    rhs_rows = _pack_bit_rows(payload_column(packets, block).bits().reshape(-1, 1))
    wanted = 2 * f + 1
    sets, formed = _greedy_sets(coeff, k, wanted)
    stats = DecodeStats(sets_formed=formed)
    if formed < wanted:
        return _failed("InsufficientIndependence", stats)
    votes: dict[BitVector, int] = {}
    for s in sets:
        idx = np.array(s)
        sols = _solve_subset(coeff.data[idx], k, k, rhs_rows[idx], 1)
        stats.solve_steps += 1
        assert sols is not None  # sets are full rank by construction
        votes[sols[0]] = votes.get(sols[0], 0) + 1
    winner, count = max(votes.items(), key=lambda kv: kv[1])
    if count >= f + 1:
        return _recovered([winner], stats, multiplicity=count)
    return _failed("NoMajority", stats, hint=winner)


# ------------------------------------------------------------- whole message


def decode_all_blocks(
    packets: Sequence[Packet],
    plan: DecodePlan,
    algorithm: str,
    rng: Optional[np.random.Generator] = None,
    b_param: float = 2.0,
) -> DecodeOutcome:
    """Decode every block of the message, sharing the coefficient-matrix
    work (eliminations, candidate walks, set construction) across the m
    per-block right-hand sides.
    """
    k, m = _stream_shape(packets)
    if k != plan.k:
        raise ValueError(f"packets carry k={k}, plan expects {plan.k}")
    if algorithm == "exhaustive":
        return _all_blocks_exhaustive(packets, plan, k, m)
    if algorithm == "randomized":
        return _all_blocks_randomized(packets, plan, k, m, rng, b_param)
    if algorithm == "majority":
        return _all_blocks_majority(packets, plan, k, m)
    if algorithm == "bp":
        return _all_blocks_bp(packets, k, m)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _all_blocks_exhaustive(packets, plan, k, m) -> DecodeOutcome:
    best_count, best_x, n_at = _scan(
        packets, list(range(m)), plan.threshold, EXHAUSTIVE_K_CEILING
    )
    stats = DecodeStats(iterations=2**k, satisfied=int(best_count.min()), solve_steps=1)
    if (n_at == 0).any():
        return _failed("NoCandidate", stats)
    if (n_at > 1).any():
        return _recovered_or_ambiguous(best_x, n_at, k, stats)
    return _recovered([BitVector.from_int(int(x), k) for x in best_x], stats)


def _recovered_or_ambiguous(best_x, n_at, k, stats) -> DecodeOutcome:
    first_bad = int(np.argmax(n_at > 1))
    return _failed(
        "Ambiguous", stats, hint=BitVector.from_int(int(best_x[first_bad]), k)
    )


def _all_blocks_randomized(packets, plan, k, m, rng, b_param=2.0) -> DecodeOutcome:
    if plan.model != "uniform":
        raise ValueError("randomized decoding needs a uniform-adversary plan")
    if rng is None:
        raise ValueError("randomized decoding needs an rng")
    f, epsilon = plan.f, plan.epsilon
    g = randomized_g(k, f, epsilon, b_param)
    n = len(packets)
    need = g + k + f + epsilon
    if n < need:
        raise ValueError(f"need at least g+k+f+epsilon = {need} packets, got {n}")
    coeff = coefficient_matrix(packets)
    rhs_rows = _payload_rows(packets)
    systems = [
        LinearSystem(coeff, payload_column(packets, b)) for b in range(m)
    ]
    sample_size = k + epsilon
    cap = _default_cap(k, f, epsilon, g)
    for it in range(1, cap + 1):
        idx = np.sort(rng.choice(n, size=sample_size, replace=False))
        sols = _solve_subset(coeff.data[idx], sample_size, k, rhs_rows[idx], m)
        if sols is None:
            continue
        sats = [count_satisfied(systems[b], sols[b]) for b in range(m)]
        if min(sats) >= plan.threshold:
            stats = DecodeStats(iterations=it, satisfied=min(sats), solve_steps=it)
            return _recovered(sols, stats)
    return _failed("IterationBudget", DecodeStats(iterations=cap, solve_steps=cap))


def _all_blocks_majority(packets, plan, k, m) -> DecodeOutcome:
    if plan.model != "uniform":
        raise ValueError("majority decoding needs a uniform-adversary plan")
    f = plan.f
    coeff = coefficient_matrix(packets)
    rhs_rows = _payload_rows(packets)
    wanted = 2 * f + 1
    sets, formed = _greedy_sets(coeff, k, wanted)
    stats = DecodeStats(sets_formed=formed)
    if formed < wanted:
        return _failed("InsufficientIndependence", stats)
    votes: list[dict[BitVector, int]] = [dict() for _ in range(m)]
    for s in sets:
        idx = np.array(s)
        sols = _solve_subset(coeff.data[idx], k, k, rhs_rows[idx], m)
        stats.solve_steps += 1
        assert sols is not None
        for b in range(m):
            votes[b][sols[b]] = votes[b].get(sols[b], 0) + 1
    blocks = []
    multiplicity = None
    for b in range(m):
        winner, count = max(votes[b].items(), key=lambda kv: kv[1])
        if count < f + 1:
            return _failed("NoMajority", stats, hint=winner)
        blocks.append(winner)
        multiplicity = count if multiplicity is None else min(multiplicity, count)
    return _recovered(blocks, stats, multiplicity=multiplicity)


def _all_blocks_bp(packets, k, m) -> DecodeOutcome:
    """Peeling over bit positions: each packet is an xor of the column
    vectors (one m-bit value per bit position of the blocks) selected by
    its coding vector, so sparse streams peel exactly like the LT code.
    """
    lt_pkts = []
    for p in packets:
        ones = expand_header(p).ones_indices()
        if ones:
            lt_pkts.append(LtPacket(frozenset(ones), p.payload))
    out = bp_decode(lt_pkts, k)
    stats = DecodeStats(iterations=len(lt_pkts))
    if isinstance(out, Decoded):
        columns = BitMatrix.from_rows(out.symbols)  # k rows of m bits
        blk = columns.transpose()
        return _recovered([blk.row(i) for i in range(m)], stats)
    return _failed("Stalled", stats)


# ------------------------------------------------------------- adaptive mode


def adaptive_decode(
    fetch: Callable[[int], Sequence[Packet]],
    k: int,
    epsilon: int,
    rng: np.random.Generator,
    f_start: int = 1,
    f_cap: Optional[int] = None,
) -> tuple[DecodeOutcome, int]:
    """Escalation loop for unknown corruption counts: assume f, request
    the randomized decoder's packet count, and double f on failure.

    This is plumbing beyond the planners' guarantees: the acceptance
    threshold moves with the assumed f, so results carry the residual
    risk of the smallest f that accepted. Returns (outcome, f_used).
    """
    cap = f_cap if f_cap is not None else k - 1
    if not 1 <= f_start <= cap < k:
        raise ValueError("need 1 <= f_start <= f_cap < k")
    f = f_start
    while True:
        g = randomized_g(k, f, epsilon)
        pkts = fetch(g + k + f + epsilon)
        plan = plan_uniform(k, f, epsilon)
        out = decode_all_blocks(pkts, plan, "randomized", rng)
        if out.ok or f >= cap:
            return out, f
        f = min(2 * f, cap)

"""Oracle and property tests for the bit-packed GF(2) linear algebra layer.

Expected values here are frozen from independent brute-force oracles that
live inside the tests (row-space enumeration for rank, candidate
enumeration for solving, per-row dot products for satisfaction counts),
not from the library under test.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from byzfount.gf2 import (
    BitMatrix,
    BitVector,
    LinearSystem,
    NoSolution,
    Underdetermined,
    count_satisfied,
    matvec,
    rank,
    rank_failure_limit,
    random_matrix,
    solve_unique,
)
from byzfount.seeds import make_rng


# ---------------------------------------------------------------- oracles


def _row_int(row_bits):
    value = 0
    for i, b in enumerate(row_bits):
        value |= int(b) << i
    return value


def _oracle_rank(rows_bits):
    """Rank via row-space enumeration: log2 of the number of distinct
    XOR combinations of the rows. Only sane for <= ~12 rows."""
    ints = [_row_int(r) for r in rows_bits]
    space = {0}
    for v in ints:
        space |= {s ^ v for s in space}
    return int(math.log2(len(space)))


def _oracle_solutions(rows_bits, rhs_bits):
    """All x satisfying every equation, by enumerating 2^ncols candidates."""
    ncols = len(rows_bits[0]) if len(rows_bits) else 0
    ints = [_row_int(r) for r in rows_bits]
    sols = []
    for x in range(1 << ncols):
        if all(((r & x).bit_count() & 1) == b for r, b in zip(ints, rhs_bits)):
            sols.append(x)
    return sols


def _random_bit_rows(rng, nrows, ncols):
    return rng.integers(0, 2, size=(nrows, ncols), dtype=np.uint8)


# ---------------------------------------------------------------- BitVector


def test_bitvector_string_round_trip():
    v = BitVector.from_string("1001")
    assert len(v) == 4
    assert v[0] == 1 and v[1] == 0 and v[2] == 0 and v[3] == 1
    assert v.to01() == "1001"
    assert v.count() == 2
    assert v.ones_indices() == [0, 3]


def test_bitvector_int_round_trip():
    for n in (1, 7, 63, 64, 65, 130):
        value = (0x9E3779B97F4A7C15 * 31) & ((1 << n) - 1)
        v = BitVector.from_int(value, n)
        assert v.to_int() == value
        assert len(v) == n


def test_bitvector_bytes_round_trip():
    v = BitVector.from_string("10110001101")
    data = v.to_bytes_lsb()
    assert len(data) == 2
    assert BitVector.from_bytes_lsb(data, 11) == v
    # byte 0 carries bits 0..7 LSB first: 10110001 -> 0x8d
    assert data[0] == 0b10001101


def test_bitvector_bytes_rejects_stray_high_bits():
    with pytest.raises(ValueError):
        BitVector.from_bytes_lsb(b"\xff", 3)


def test_bitvector_xor_invert():
    a = BitVector.from_string("1100")
    b = BitVector.from_string("1010")
    assert (a ^ b).to01() == "0110"
    assert (~a).to01() == "0011"
    # invert stays within the declared length even across a word boundary
    w = BitVector.zeros(65)
    assert (~w).count() == 65


def test_bitvector_eq_hash():
    a = BitVector.from_string("101")
    b = BitVector.from_int(0b101, 3)
    c = BitVector.from_int(0b101, 4)
    assert a == b and hash(a) == hash(b)
    assert a != c  # same bits, different length
    assert len({a, b, c}) == 2


def test_bitvector_with_bit():
    v = BitVector.zeros(70)
    w = v.with_bit(69, 1)
    assert v.count() == 0 and w[69] == 1 and w.count() == 1
    assert w.with_bit(69, 0) == v


def test_bitvector_immutable():
    v = BitVector.zeros(8)
    with pytest.raises(ValueError):
        v.words[0] = 1


# ---------------------------------------------------------------- BitMatrix


def test_bitmatrix_row_access():
    m = BitMatrix.from_bit_rows([[1, 1, 0], [0, 1, 1]])
    assert m.rows == 2 and m.cols == 3
    assert m.row(0).to01() == "110"
    assert m.row(1).to01() == "011"


def test_bitmatrix_from_rows_matches_bit_rows():
    vs = [BitVector.from_string("10101"), BitVector.from_string("01010")]
    a = BitMatrix.from_rows(vs)
    b = BitMatrix.from_bit_rows([[1, 0, 1, 0, 1], [0, 1, 0, 1, 0]])
    assert a == b


def test_bitmatrix_transpose():
    m = BitMatrix.from_bit_rows([[1, 0], [1, 1], [0, 1]])
    t = m.transpose()
    assert t.rows == 2 and t.cols == 3
    assert t.row(0).to01() == "110"
    assert t.row(1).to01() == "011"
    assert t.transpose() == m


def test_bitmatrix_identity():
    i4 = BitMatrix.identity(4)
    assert rank(i4) == 4
    assert i4.row(2).to01() == "0010"


# ---------------------------------------------------------------- rank


def test_rank_zero_matrix():
    assert rank(BitMatrix.zeros(5, 9)) == 0


def test_rank_dependent_rows():
    # third row is the xor of the first two
    m = BitMatrix.from_bit_rows([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert rank(m) == 2


def test_rank_matches_row_space_oracle():
    rng = make_rng(1001)
    for _ in range(60):
        nrows = int(rng.integers(1, 9))
        ncols = int(rng.integers(1, 9))
        bits = _random_bit_rows(rng, nrows, ncols)
        m = BitMatrix.from_bit_rows(bits)
        assert rank(m) == _oracle_rank(bits)


def test_rank_across_word_boundary():
    rng = make_rng(1002)
    for ncols in (63, 64, 65, 100, 128, 130):
        bits = _random_bit_rows(rng, 7, ncols)
        m = BitMatrix.from_bit_rows(bits)
        assert rank(m) == _oracle_rank(bits)


def test_rank_equals_transpose_rank():
    rng = make_rng(1003)
    for _ in range(40):
        nrows = int(rng.integers(1, 12))
        ncols = int(rng.integers(1, 80))
        m = BitMatrix.from_bit_rows(_random_bit_rows(rng, nrows, ncols))
        assert rank(m) == rank(m.transpose())


# ---------------------------------------------------------------- solve


def test_solve_unique_two_by_two():
    # x0 ^ x1 = 1, x1 = 1  ->  x = 01 (bit 0 clear, bit 1 set)
    system = LinearSystem(
        BitMatrix.from_bit_rows([[1, 1], [0, 1]]),
        BitVector.from_string("11"),
    )
    x = solve_unique(system)
    assert isinstance(x, BitVector)
    assert x.to01() == "01"
    # oracle: enumerate all four candidates
    assert _oracle_solutions([[1, 1], [0, 1]], [1, 1]) == [0b10]


def test_solve_no_solution():
    system = LinearSystem(
        BitMatrix.from_bit_rows([[1, 0], [1, 0]]),
        BitVector.from_string("10"),
    )
    assert solve_unique(system) is NoSolution


def test_solve_underdetermined():
    system = LinearSystem(
        BitMatrix.from_bit_rows([[1, 1]]),
        BitVector.from_string("1"),
    )
    assert solve_unique(system) is Underdetermined


def test_solve_matches_enumeration_oracle():
    rng = make_rng(1004)
    agree = {"unique": 0, "none": 0, "under": 0}
    for _ in range(250):
        ncols = int(rng.integers(1, 7))
        nrows = int(rng.integers(1, ncols + 4))
        bits = _random_bit_rows(rng, nrows, ncols)
        rhs = rng.integers(0, 2, size=nrows, dtype=np.uint8)
        system = LinearSystem(BitMatrix.from_bit_rows(bits), BitVector.from_bits(rhs))
        got = solve_unique(system)
        sols = _oracle_solutions(bits, rhs)
        if len(sols) == 1:
            assert isinstance(got, BitVector) and got.to_int() == sols[0]
            agree["unique"] += 1
        elif not sols:
            assert got is NoSolution
            agree["none"] += 1
        else:
            assert got is Underdetermined
            agree["under"] += 1
    # the sweep must actually exercise all three outcomes
    assert all(agree.values()), agree


def test_solve_wide_system():
    rng = make_rng(1005)
    for ncols in (64, 65, 90):
        truth = BitVector.random(ncols, rng)
        m = random_matrix(ncols + 8, ncols, rng)
        system = LinearSystem(m, matvec(m, truth))
        got = solve_unique(system)
        if isinstance(got, BitVector):
            assert got == truth
        else:
            assert got is Underdetermined  # rank shortfall is legal, wrongness is not


def test_solve_rejects_mismatched_shapes():
    with pytest.raises(ValueError):
        LinearSystem(BitMatrix.identity(3), BitVector.zeros(4))


# ---------------------------------------------------------------- count_satisfied


def test_count_satisfied_matches_per_row_oracle():
    rng = make_rng(1006)
    for _ in range(80):
        ncols = int(rng.integers(1, 12))
        nrows = int(rng.integers(1, 11))
        bits = _random_bit_rows(rng, nrows, ncols)
        rhs = rng.integers(0, 2, size=nrows, dtype=np.uint8)
        xbits = rng.integers(0, 2, size=ncols, dtype=np.uint8)
        system = LinearSystem(BitMatrix.from_bit_rows(bits), BitVector.from_bits(rhs))
        x = BitVector.from_bits(xbits)
        expected = sum(
            int((_row_int(r) & _row_int(xbits)).bit_count() & 1) == int(b)
            for r, b in zip(bits, rhs)
        )
        assert count_satisfied(system, x) == expected


def test_count_satisfied_solution_hits_every_row():
    rng = make_rng(1007)
    truth = BitVector.random(20, rng)
    m = random_matrix(33, 20, rng)
    system = LinearSystem(m, matvec(m, truth))
    assert count_satisfied(system, truth) == 33


def test_count_satisfied_dimension_error():
    system = LinearSystem(BitMatrix.identity(3), BitVector.zeros(3))
    with pytest.raises(ValueError):
        count_satisfied(system, BitVector.zeros(4))


# ---------------------------------------------------------------- matvec


def test_matvec_oracle():
    rng = make_rng(1008)
    for _ in range(40):
        ncols = int(rng.integers(1, 70))
        nrows = int(rng.integers(1, 70))
        bits = _random_bit_rows(rng, nrows, ncols)
        xbits = rng.integers(0, 2, size=ncols, dtype=np.uint8)
        m = BitMatrix.from_bit_rows(bits)
        x = BitVector.from_bits(xbits)
        out = matvec(m, x)
        assert len(out) == nrows
        for i in range(nrows):
            assert out[i] == ((_row_int(bits[i]) & _row_int(xbits)).bit_count() & 1)


# ---------------------------------------------------------------- random_matrix


def test_random_matrix_deterministic():
    a = random_matrix(10, 67, make_rng(42))
    b = random_matrix(10, 67, make_rng(42))
    c = random_matrix(10, 67, make_rng(43))
    assert a == b
    assert a != c


def test_random_matrix_bernoulli_deterministic():
    a = random_matrix(10, 50, make_rng(42), p=0.2)
    b = random_matrix(10, 50, make_rng(42), p=0.2)
    assert a == b


def test_random_matrix_padding_is_canonical():
    m = random_matrix(20, 67, make_rng(7))
    assert int(m.data[:, -1].max()) < (1 << (67 - 64))


def test_random_matrix_uniform_vs_half_bernoulli_balance():
    # ones fractions of Uniform and Bernoulli(0.5) agree within 1% at 1e5 bits
    rng = make_rng(2024)
    n_bits = 100_000
    u = random_matrix(n_bits // 50, 50, rng)
    b = random_matrix(n_bits // 50, 50, rng, p=0.5)
    f_u = sum(u.row(i).count() for i in range(u.rows)) / n_bits
    f_b = sum(b.row(i).count() for i in range(b.rows)) / n_bits
    assert abs(f_u - f_b) < 0.01
    assert abs(f_u - 0.5) < 0.01


def test_random_matrix_bernoulli_density():
    rng = make_rng(5)
    m = random_matrix(2000, 64, rng, p=0.1)
    ones = sum(m.row(i).count() for i in range(m.rows))
    assert abs(ones / (2000 * 64) - 0.1) < 0.01


def test_random_matrix_rejects_degenerate_p():
    rng = make_rng(0)
    for bad in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            random_matrix(2, 2, rng, p=bad)


# ---------------------------------------------------------------- rank_failure_limit


def _oracle_limit(d, terms=64):
    log_prod = sum(math.log1p(-(2.0 ** -j)) for j in range(d + 1, d + 1 + terms))
    return -math.expm1(log_prod)


def test_rank_failure_limit_square_case():
    # d = 0: the classic 1 - prod_{j>=1}(1 - 2^-j) ~ 0.7112
    assert rank_failure_limit(0) == pytest.approx(0.711212, abs=1e-6)
    assert rank_failure_limit(0) == pytest.approx(_oracle_limit(0), rel=1e-12)


def test_rank_failure_limit_monotone_and_bounded():
    prev = 1.0
    for d in range(0, 41):
        v = rank_failure_limit(d)
        assert 0.0 < v < prev
        if d >= 1:
            assert v < 2.0 ** -d
        assert v == pytest.approx(_oracle_limit(d), rel=1e-9)
        prev = v


def test_rank_failure_limit_rejects_negative():
    with pytest.raises(ValueError):
        rank_failure_limit(-1)


# ---------------------------------------------------------------- Monte Carlo sanity


def test_square_uniform_rank_failure_matches_limit():
    # small-trial version of the classic constant; the acceptance suite
    # runs the full-size experiment
    rng = make_rng(31337)
    k, trials = 24, 4000
    fails = sum(rank(random_matrix(k, k, rng)) < k for _ in range(trials))
    assert fails / trials == pytest.approx(rank_failure_limit(0), abs=0.03)


def test_overdetermined_failure_under_bound():
    rng = make_rng(31338)
    k, eps, trials = 20, 4, 3000
    fails = sum(rank(random_matrix(k + eps, k, rng)) < k for _ in range(trials))
    assert fails / trials <= 2.0 ** -eps + 3 * math.sqrt(2.0 ** -eps / trials)

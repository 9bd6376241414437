"""Cross-backend equivalence: the compiled kernels must be bit-identical
to the pure-Python reference on the same inputs, pivots and all."""

from __future__ import annotations

import numpy as np
import pytest

from byzfount._kernels import pure
from byzfount.gf2 import _pack_bit_rows
from byzfount.seeds import make_rng

compiled = pytest.importorskip("byzfount._kernels._gf2c")


def _random_packed(rng, nrows, ncols):
    bits = rng.integers(0, 2, size=(nrows, ncols), dtype=np.uint8)
    return _pack_bit_rows(bits)


def test_rank_parity():
    rng = make_rng(900)
    for _ in range(60):
        nrows = int(rng.integers(1, 40))
        ncols = int(rng.integers(1, 140))
        a = _random_packed(rng, nrows, ncols)
        assert compiled.rank(a.copy(), nrows, ncols) == pure.rank(a.copy(), nrows, ncols)


def test_rref_parity_including_rhs():
    rng = make_rng(901)
    for _ in range(60):
        nrows = int(rng.integers(1, 30))
        ncols = int(rng.integers(1, 100))
        rhs_cols = int(rng.integers(1, 70))
        a = _random_packed(rng, nrows, ncols)
        rhs = _random_packed(rng, nrows, rhs_cols)
        a1, r1 = a.copy(), rhs.copy()
        a2, r2 = a.copy(), rhs.copy()
        rk1, piv1 = compiled.rref(a1, nrows, ncols, r1)
        rk2, piv2 = pure.rref(a2, nrows, ncols, r2)
        assert rk1 == rk2
        assert list(piv1) == list(piv2)
        assert np.array_equal(a1, a2)
        assert np.array_equal(r1, r2)


def test_rref_parity_without_rhs():
    rng = make_rng(902)
    for _ in range(30):
        nrows = int(rng.integers(1, 25))
        ncols = int(rng.integers(1, 80))
        a = _random_packed(rng, nrows, ncols)
        a1, a2 = a.copy(), a.copy()
        assert compiled.rref(a1, nrows, ncols)[0] == pure.rref(a2, nrows, ncols)[0]
        assert np.array_equal(a1, a2)


def test_matvec_parity():
    rng = make_rng(903)
    for _ in range(60):
        nrows = int(rng.integers(1, 150))
        ncols = int(rng.integers(1, 150))
        a = _random_packed(rng, nrows, ncols)
        x = _random_packed(rng, 1, ncols)[0]
        assert np.array_equal(
            compiled.matvec(a, nrows, x), pure.matvec(a, nrows, x)
        )


def test_popcount_parity():
    rng = make_rng(904)
    for _ in range(20):
        n = int(rng.integers(1, 40))
        words = rng.integers(0, 0xFFFFFFFFFFFFFFFF, size=n, dtype=np.uint64, endpoint=True)
        assert compiled.popcount(words) == pure.popcount(words)


def test_exhaustive_scan_parity():
    rng = make_rng(905)
    for _ in range(25):
        k = int(rng.integers(1, 11))
        nrows = int(rng.integers(1, 90))
        nvar = int(rng.integers(1, 5))
        threshold = int(rng.integers(0, nrows + 1))
        cols = _random_packed(rng, k, nrows)
        rhs0 = _random_packed(rng, nvar, nrows)
        got_c = compiled.exhaustive_scan(cols, rhs0, nrows, k, threshold)
        got_p = pure.exhaustive_scan(cols, rhs0, nrows, k, threshold)
        for gc, gp in zip(got_c, got_p):
            assert np.array_equal(gc, gp)


def test_exhaustive_scan_brute_force_oracle():
    # the scan's counts must equal a direct per-candidate evaluation
    rng = make_rng(906)
    for _ in range(10):
        k = int(rng.integers(1, 8))
        nrows = int(rng.integers(1, 30))
        threshold = int(rng.integers(0, nrows + 1))
        row_bits = rng.integers(0, 2, size=(nrows, k), dtype=np.uint8)
        rhs_bits = rng.integers(0, 2, size=nrows, dtype=np.uint8)
        cols = _pack_bit_rows(row_bits.T.copy())  # cols[t] packs variable t across rows
        rhs0 = _pack_bit_rows(rhs_bits.reshape(1, -1))
        best, bx, nat = pure.exhaustive_scan(cols, rhs0, nrows, k, threshold)
        counts = []
        for x in range(1 << k):
            xb = np.array([(x >> t) & 1 for t in range(k)], dtype=np.uint8)
            sat = int((((row_bits @ xb) % 2) == rhs_bits).sum())
            counts.append(sat)
        assert best[0] == max(counts)
        assert counts[int(bx[0])] == max(counts)
        assert nat[0] == sum(c >= threshold for c in counts)

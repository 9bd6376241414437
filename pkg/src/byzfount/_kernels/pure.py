"""Pure-Python GF(2) kernels.

Shared layout contract with the compiled backend: a matrix is a
C-contiguous numpy uint64 array of shape (rows, words); bit i of a row
lives in word i // 64 at position i % 64 (LSB first), and bits past the
declared width are zero.  Rows are mirrored into Python big ints here,
which keeps the fallback correct for any width; the compiled backend is
the fast path.

Input buffers are scratch: rref writes its result back, the others may
leave inputs untouched but callers must not rely on it.
"""

from __future__ import annotations

import numpy as np


def _row_ints(a: np.ndarray) -> list[int]:
    buf = a.astype("<u8", copy=False).tobytes()
    stride = a.shape[1] * 8
    return [
        int.from_bytes(buf[i * stride:(i + 1) * stride], "little")
        for i in range(a.shape[0])
    ]


def _write_rows(ints: list[int], a: np.ndarray) -> None:
    stride = a.shape[1] * 8
    raw = b"".join(v.to_bytes(stride, "little") for v in ints)
    a[...] = np.frombuffer(raw, dtype="<u8").reshape(a.shape)


def rank(a: np.ndarray, nrows: int, ncols: int) -> int:
    """Rank over GF(2) by forward elimination."""
    rows = _row_ints(a)
    r = 0
    for col in range(ncols):
        bit = 1 << col
        pivot = -1
        for i in range(r, nrows):
            if rows[i] & bit:
                pivot = i
                break
        if pivot < 0:
            continue
        rows[pivot], rows[r] = rows[r], rows[pivot]
        for i in range(pivot + 1, nrows):
            if rows[i] & bit:
                rows[i] ^= rows[r]
        r += 1
        if r == nrows:
            break
    return r


def rref(a: np.ndarray, nrows: int, ncols: int, rhs: np.ndarray | None = None):
    """Reduced row echelon form over the first ncols columns, in place.

    Row swaps and xors are applied to rhs as well (one packed row of
    right-hand-side bits per matrix row).  Returns (rank, pivot_cols).
    """
    rows = _row_ints(a)
    rvec = _row_ints(rhs) if rhs is not None else None
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        bit = 1 << col
        pivot = -1
        for i in range(r, nrows):
            if rows[i] & bit:
                pivot = i
                break
        if pivot < 0:
            continue
        rows[pivot], rows[r] = rows[r], rows[pivot]
        if rvec is not None:
            rvec[pivot], rvec[r] = rvec[r], rvec[pivot]
        for i in range(nrows):
            if i != r and (rows[i] & bit):
                rows[i] ^= rows[r]
                if rvec is not None:
                    rvec[i] ^= rvec[r]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    _write_rows(rows, a)
    if rvec is not None:
        _write_rows(rvec, rhs)
    return r, pivots


def matvec(a: np.ndarray, nrows: int, x: np.ndarray) -> np.ndarray:
    """Per-row inner products <row_i, x>, packed LSB first into uint64 words."""
    xv = int.from_bytes(x.astype("<u8", copy=False).tobytes(), "little")
    out = 0
    for i, row in enumerate(_row_ints(a)):
        out |= ((row & xv).bit_count() & 1) << i
    nwords = max(1, (nrows + 63) // 64)
    return np.frombuffer(out.to_bytes(nwords * 8, "little"), dtype="<u8").astype(
        np.uint64
    )


def popcount(words: np.ndarray) -> int:
    return int.from_bytes(words.astype("<u8", copy=False).tobytes(), "little").bit_count()


def exhaustive_scan(
    cols: np.ndarray,
    rhs0: np.ndarray,
    nrows: int,
    k: int,
    threshold: int,
):
    """Walk all 2^k candidate vectors in Gray-code order.

    cols[t] holds, packed across rows, the coefficient bit of variable t in
    every equation; rhs0[b] is the packed right-hand side of variant b.
    The mismatch pattern of candidate x in variant b is rhs0[b] xor the
    running xor of cols over the set bits of x, so each step costs one xor
    and one popcount per variant.

    Returns (best_count, best_x, n_at_threshold) per variant, ties resolved
    to the earliest candidate on the walk (identically to the compiled
    backend).
    """
    col_ints = _row_ints(cols)
    rhs_ints = _row_ints(rhs0)
    nvar = len(rhs_ints)
    best_count = [nrows - r.bit_count() for r in rhs_ints]
    best_x = [0] * nvar
    n_at = [1 if c >= threshold else 0 for c in best_count]
    walk = 0
    for i in range(1, 1 << k):
        walk ^= col_ints[(i & -i).bit_length() - 1]
        x = i ^ (i >> 1)
        for b in range(nvar):
            cnt = nrows - (walk ^ rhs_ints[b]).bit_count()
            if cnt > best_count[b]:
                best_count[b] = cnt
                best_x[b] = x
            if cnt >= threshold:
                n_at[b] += 1
    return (
        np.array(best_count, dtype=np.int64),
        np.array(best_x, dtype=np.uint64),
        np.array(n_at, dtype=np.int64),
    )

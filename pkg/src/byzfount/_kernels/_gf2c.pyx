# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled GF(2) kernels.

Same layout contract and same results as the pure backend in pure.py:
uint64 words, LSB-first bits, canonical zero padding.  Any change here
must keep the two backends bit-identical (tests/test_kernels.py).
"""

import numpy as np

cdef extern from *:
    """
    #define POPCNT64(x) __builtin_popcountll(x)
    #define CTZ64(x) __builtin_ctzll(x)
    """
    int POPCNT64(unsigned long long x) nogil
    int CTZ64(unsigned long long x) nogil

ctypedef unsigned long long u64


def rank(a, int nrows, int ncols):
    """Rank by forward elimination; clobbers the buffer."""
    cdef u64[:, ::1] m = a
    cdef int nw = m.shape[1]
    cdef int r = 0, col, i, w, ws, pivot
    cdef u64 bit, tmp
    for col in range(ncols):
        ws = col >> 6
        bit = (<u64>1) << (col & 63)
        pivot = -1
        for i in range(r, nrows):
            if m[i, ws] & bit:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            for w in range(ws, nw):
                tmp = m[pivot, w]
                m[pivot, w] = m[r, w]
                m[r, w] = tmp
        for i in range(pivot + 1, nrows):
            if m[i, ws] & bit:
                for w in range(ws, nw):
                    m[i, w] ^= m[r, w]
        r += 1
        if r == nrows:
            break
    return r


def rref(a, int nrows, int ncols, rhs=None):
    """Reduced row echelon form in place, rhs rows carried along.

    Returns (rank, pivot_cols); identical pivot choices to the pure
    backend (first row at or below the cursor with the bit set).
    """
    cdef u64[:, ::1] m = a
    cdef u64[:, ::1] rv = rhs if rhs is not None else None
    cdef bint have_rhs = rhs is not None
    cdef int nw = m.shape[1]
    cdef int rw = rv.shape[1] if have_rhs else 0
    cdef int r = 0, col, i, w, ws, pivot
    cdef u64 bit, tmp
    pivots = []
    for col in range(ncols):
        ws = col >> 6
        bit = (<u64>1) << (col & 63)
        pivot = -1
        for i in range(r, nrows):
            if m[i, ws] & bit:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            # the pivot row has no bits below this column, so earlier
            # words only matter in the swap, not in the xors
            for w in range(nw):
                tmp = m[pivot, w]
                m[pivot, w] = m[r, w]
                m[r, w] = tmp
            if have_rhs:
                for w in range(rw):
                    tmp = rv[pivot, w]
                    rv[pivot, w] = rv[r, w]
                    rv[r, w] = tmp
        for i in range(nrows):
            if i != r and (m[i, ws] & bit):
                for w in range(ws, nw):
                    m[i, w] ^= m[r, w]
                if have_rhs:
                    for w in range(rw):
                        rv[i, w] ^= rv[r, w]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    return r, pivots


def matvec(a, int nrows, x):
    """Per-row inner products <row_i, x>, packed LSB first."""
    cdef const u64[:, ::1] m = a
    cdef const u64[::1] xv = x
    cdef int nw = m.shape[1]
    cdef int outw = (nrows + 63) >> 6
    if outw < 1:
        outw = 1
    out_arr = np.zeros(outw, dtype=np.uint64)
    cdef u64[::1] out = out_arr
    cdef int i, w, par
    cdef u64 acc
    for i in range(nrows):
        acc = 0
        for w in range(nw):
            acc ^= m[i, w] & xv[w]
        par = POPCNT64(acc) & 1
        out[i >> 6] |= (<u64>par) << (i & 63)
    return out_arr


def popcount(words):
    cdef const u64[::1] v = np.ascontiguousarray(words, dtype=np.uint64)
    cdef int i
    cdef long long total = 0
    for i in range(v.shape[0]):
        total += POPCNT64(v[i])
    return total


def exhaustive_scan(cols, rhs0, int nrows, int k, int threshold):
    """Gray-code walk over all 2^k candidates; see pure.exhaustive_scan.

    Kept allocation-free inside the loop: the running xor of visited
    columns lives in a small stack buffer, and each step updates every
    variant with one xor+popcount per word.
    """
    cdef const u64[:, ::1] cv = cols
    cdef const u64[:, ::1] rv = rhs0
    cdef int rw = cv.shape[1]
    cdef int nvar = rv.shape[0]
    if k < 1 or k > 30:
        raise ValueError("scan supports 1 <= k <= 30")
    if rw > 16:
        raise ValueError("scan supports at most 1024 equations")

    best_arr = np.zeros(nvar, dtype=np.int64)
    bx_arr = np.zeros(nvar, dtype=np.uint64)
    nat_arr = np.zeros(nvar, dtype=np.int64)
    cdef long long[::1] best = best_arr
    cdef u64[::1] bx = bx_arr
    cdef long long[::1] nat = nat_arr

    cdef u64 walk[16]
    cdef int w, b, cnt, t
    cdef u64 i, total, x
    for w in range(rw):
        walk[w] = 0
    for b in range(nvar):
        cnt = nrows
        for w in range(rw):
            cnt -= POPCNT64(rv[b, w])
        best[b] = cnt
        bx[b] = 0
        nat[b] = 1 if cnt >= threshold else 0

    total = (<u64>1) << k
    i = 1
    while i < total:
        t = CTZ64(i)
        for w in range(rw):
            walk[w] ^= cv[t, w]
        x = i ^ (i >> 1)
        for b in range(nvar):
            cnt = nrows
            for w in range(rw):
                cnt -= POPCNT64(walk[w] ^ rv[b, w])
            if cnt > best[b]:
                best[b] = cnt
                bx[b] = x
            if cnt >= threshold:
                nat[b] += 1
        i += 1
    return best_arr, bx_arr, nat_arr

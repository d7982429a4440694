# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as ``_pykernel``.

The tableau lives in an ``array('q')`` buffer.  Products are formed in
``__int128`` and every stored entry is kept below 2**62 in magnitude, so an
entry that would leave that range aborts the loop with ``OVERFLOW``; the
caller then reruns the problem on the arbitrary-precision Python kernel.
"""
from array import array

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef long long LIMIT = 4611686018427387904  # 2**62

cdef enum:
    C_OPTIMAL = 0
    C_UNBOUNDED = 1
    C_OVERFLOW = 2

OPTIMAL = C_OPTIMAL
UNBOUNDED = C_UNBOUNDED
OVERFLOW = C_OVERFLOW


def make_table(values):
    out = array('q', values)
    for v in out:
        if v >= LIMIT or v <= -LIMIT:
            raise OverflowError("initial entry exceeds the int64 kernel range")
    return out


cdef inline bint _fits(i128 v) noexcept nogil:
    return v < <i128>LIMIT and v > -<i128>LIMIT


cdef long long _pivot(long long[::1] T, Py_ssize_t width, Py_ssize_t rows,
                      Py_ssize_t r, Py_ssize_t s, long long d) noexcept nogil:
    # returns the new denominator, or 0 on overflow
    cdef Py_ssize_t i, j, base
    cdef Py_ssize_t rb = r * width
    cdef long long p = T[rb + s]
    cdef long long f
    cdef i128 v
    for i in range(rows):
        if i == r:
            continue
        base = i * width
        f = T[base + s]
        if f == 0:
            if p == d:
                continue
            for j in range(width):
                v = (<i128>T[base + j] * p) / d
                if not _fits(v):
                    return 0
                T[base + j] = <long long>v
            continue
        for j in range(width):
            v = (<i128>T[base + j] * p - <i128>f * T[rb + j]) / d
            if not _fits(v):
                return 0
            T[base + j] = <long long>v
    return p


def pivot(long long[::1] T, Py_ssize_t width, Py_ssize_t rows, Py_ssize_t r, Py_ssize_t s, long long d):
    cdef long long nd
    with nogil:
        nd = _pivot(T, width, rows, r, s, d)
    if nd == 0:
        raise OverflowError("tableau entry exceeds the int64 kernel range")
    return nd


def simplex_loop(long long[::1] T, Py_ssize_t width, Py_ssize_t m, Py_ssize_t rows,
                 Py_ssize_t obj, long long[::1] basis, long long d, Py_ssize_t ncols):
    cdef Py_ssize_t rhs = width - 1
    cdef Py_ssize_t ob = obj * width
    cdef Py_ssize_t i, j, r, s
    cdef long long a, bn, bd, num
    cdef i128 lhs, cur
    cdef long it = 0
    cdef int status = -1
    with nogil:
        while True:
            s = -1
            for j in range(ncols):
                if T[ob + j] < 0:
                    s = j
                    break
            if s < 0:
                status = C_OPTIMAL
                break
            r = -1
            bn = 0
            bd = 0
            for i in range(m):
                a = T[i * width + s]
                if a > 0:
                    num = T[i * width + rhs]
                    if r < 0:
                        r = i
                        bn = num
                        bd = a
                        continue
                    lhs = <i128>num * bd
                    cur = <i128>bn * a
                    if lhs < cur or (lhs == cur and basis[i] < basis[r]):
                        r = i
                        bn = num
                        bd = a
            if r < 0:
                status = C_UNBOUNDED
                break
            d = _pivot(T, width, rows, r, s, d)
            if d == 0:
                status = C_OVERFLOW
                break
            basis[r] = s
            it += 1
    return status, d, it


cdef inline bint _limit(unsigned int F, int x, unsigned int[::1] vics,
                        long long[::1] start) noexcept nogil:
    cdef unsigned int bit = 1u << x
    cdef Py_ssize_t k
    for k in range(start[x], start[x + 1]):
        if (vics[k] & F & ~bit) == 0:
            return False
    return True


def linked_closure(int n, vic_masks):
    if n > 24:
        raise ValueError("compiled closure supports at most 24 points")
    cdef unsigned int full = (1u << n) - 1u
    ordered = sorted(set(int(v) for v in vic_masks), key=lambda v: (bin(v).count("1"), v))
    per_point = [[v for v in ordered if v >> x & 1] for x in range(n)]
    flat = array('I', [v for lst in per_point for v in lst])
    offsets = [0]
    for lst in per_point:
        offsets.append(offsets[len(offsets) - 1] + len(lst))
    cdef unsigned int[::1] vics = flat if len(flat) else array('I', [0])
    cdef long long[::1] start = array('q', offsets)
    buf = bytearray(1 << n)
    cdef unsigned char[::1] member = buf
    out = array('I', [0]) * (1 << n)
    cdef unsigned int[::1] members = out
    cdef Py_ssize_t count = 0, qi = 0, k
    cdef unsigned int F, G, H
    cdef int x

    for x in range(n):
        H = 1u << x
        if not member[H]:
            member[H] = 1
            members[count] = H
            count += 1
    for v in ordered:
        H = <unsigned int>v
        if not member[H]:
            member[H] = 1
            members[count] = H
            count += 1
    with nogil:
        while qi < count and <unsigned int>count < full:
            F = members[qi]
            qi += 1
            for x in range(n):
                if not (F >> x) & 1u and _limit(F, x, vics, start):
                    H = F | (1u << x)
                    if not member[H]:
                        member[H] = 1
                        members[count] = H
                        count += 1
            k = 0
            while k < count:
                G = members[k]
                k += 1
                if G & F:
                    H = G | F
                    if not member[H]:
                        member[H] = 1
                        members[count] = H
                        count += 1
    return sorted(out[:count])

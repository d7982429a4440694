"""Pure-Python kernels.  Reference semantics for ``_ckernel.pyx``.

The simplex tableau is a flat row-major sequence of integers of ``rows * width``
entries sharing one positive common denominator ``d`` (fraction-free,
integer-preserving pivoting): the rational tableau is ``T / d``.  Python ints
never overflow, so this module is also the fallback when the compiled kernel
reports an int64 overflow.
"""

OPTIMAL = 0
UNBOUNDED = 1
OVERFLOW = 2


def make_table(values):
    return list(values)


def pivot(T, width, rows, r, s, d):
    """Pivot on entry ``(r, s)``; returns the new common denominator."""
    rb = r * width
    prow = T[rb:rb + width]
    p = prow[s]
    for i in range(rows):
        if i == r:
            continue
        base = i * width
        f = T[base + s]
        if f == 0:
            if p != d:
                for j in range(base, base + width):
                    T[j] = T[j] * p // d
            continue
        for j in range(width):
            T[base + j] = (T[base + j] * p - f * prow[j]) // d
    return p


def simplex_loop(T, width, m, rows, obj, basis, d, ncols):
    """Minimize the objective stored in row *obj* with Bland's rule.

    Entering candidates are columns ``0..ncols-1``.  Returns
    ``(status, d, iterations)``.
    """
    rhs = width - 1
    ob = obj * width
    it = 0
    while True:
        s = -1
        for j in range(ncols):
            if T[ob + j] < 0:
                s = j
                break
        if s < 0:
            return OPTIMAL, d, it
        r = -1
        bn = bd = 0
        for i in range(m):
            a = T[i * width + s]
            if a > 0:
                num = T[i * width + rhs]
                if r < 0:
                    r, bn, bd = i, num, a
                    continue
                lhs = num * bd
                cur = bn * a
                if lhs < cur or (lhs == cur and basis[i] < basis[r]):
                    r, bn, bd = i, num, a
        if r < 0:
            return UNBOUNDED, d, it
        d = pivot(T, width, rows, r, s, d)
        basis[r] = s
        it += 1


def _limit(F, x, vic_by_point):
    bit = 1 << x
    for v in vic_by_point[x]:
        if not (v & F & ~bit):
            return False
    return True


def linked_closure(n, vic_masks):
    """All V-linked subsets (as bitmasks) of an ``n``-point space, sorted."""
    full = (1 << n) - 1
    vic_by_point = [[] for _ in range(n)]
    for v in sorted(set(vic_masks), key=lambda v: (bin(v).count("1"), v)):
        for x in range(n):
            if v >> x & 1:
                vic_by_point[x].append(v)
    member = bytearray(1 << n)
    members = []

    def add(F):
        if not member[F]:
            member[F] = 1
            members.append(F)

    for x in range(n):
        add(1 << x)
    for v in vic_masks:
        add(v)
    qi = 0
    while qi < len(members) and len(members) < full:
        F = members[qi]
        qi += 1
        for x in range(n):
            if not F >> x & 1 and _limit(F, x, vic_by_point):
                add(F | 1 << x)
        k = 0
        while k < len(members):
            G = members[k]
            k += 1
            if G & F:
                add(G | F)
    return sorted(members)

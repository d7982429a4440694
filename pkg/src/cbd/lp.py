"""Exact rational linear programming over ``{x >= 0 : A x = b}``.

Two-phase primal simplex with Bland's anti-cycling rule on a fraction-free
integer tableau.  The pivot loop runs in :mod:`cbd._kernels`; when the compiled
int64 kernel overflows, the problem is re-solved with Python integers.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from . import _kernels
from ._kernels import OPTIMAL, OVERFLOW, UNBOUNDED


@dataclass(frozen=True)
class LPProblem:
    """Equality-constrained LP with nonnegative variables.

    ``rows[i]`` is a sequence of ``(column, coefficient)`` pairs; ``rhs[i]`` its
    right-hand side.  Coefficients and right-hand sides are exact rationals.
    """

    num_vars: int
    rows: tuple
    rhs: tuple
    row_labels: tuple | None = None

    def __post_init__(self):
        rows = tuple(tuple((int(j), Fraction(a)) for j, a in row) for row in self.rows)
        rhs = tuple(Fraction(b) for b in self.rhs)
        if len(rows) != len(rhs):
            raise ValueError("rows and rhs differ in length")
        for row in rows:
            for j, _ in row:
                if not 0 <= j < self.num_vars:
                    raise ValueError(f"column {j} outside 0..{self.num_vars - 1}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "rhs", rhs)

    @property
    def num_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class LPResult:
    """``status`` is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.

    For feasibility-only solves ``"optimal"`` means feasible.  ``residual`` is
    the phase-1 optimum (sum of artificial variables), zero iff feasible.
    """

    status: str
    solution: tuple | None
    residual: Fraction
    value: Fraction | None = None
    iterations: int = 0
    backend: str = ""

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _lcm_den(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v.denominator)
    return out


def _presolve(lp: LPProblem):
    """Variables in a zero-rhs row with positive coefficients must vanish."""
    fixed = set()
    for row, b in zip(lp.rows, lp.rhs):
        if b == 0 and row and all(a > 0 for _, a in row):
            fixed.update(j for j, _ in row)
    return fixed


class _Tableau:
    def __init__(self, lp: LPProblem, objective: Mapping | None, maximize: bool, fixed: set):
        self.n = lp.num_vars
        keep_cols = [j for j in range(self.n) if j not in fixed]
        self.col_of = {j: k for k, j in enumerate(keep_cols)}
        self.keep_cols = keep_cols
        rows = []
        rhs = []
        for row, b in zip(lp.rows, lp.rhs):
            merged: dict[int, Fraction] = {}
            for j, a in row:
                if j in self.col_of and a:
                    merged[self.col_of[j]] = merged.get(self.col_of[j], 0) + a
            merged = {k: a for k, a in merged.items() if a}
            if not merged and b == 0:
                continue
            scale = _lcm_den(merged.values())
            irow = {k: int(a * scale) for k, a in merged.items()}
            ib = b * scale
            if ib < 0:
                irow = {k: -a for k, a in irow.items()}
                ib = -ib
            rows.append((irow, ib, scale))
            rhs.append(ib)
        self.nv = len(keep_cols)
        self.m = len(rows)
        # variable scaling x' = L x makes every right-hand side integral
        self.L = _lcm_den(rhs)
        self.K = math.lcm(*[s for _, _, s in rows]) if rows else 1
        m, nv = self.m, self.nv
        width = nv + m + 1
        self.width = width
        self.rows_total = m + 2
        T = [0] * (self.rows_total * width)
        p1 = [0] * width
        for i, (irow, ib, scale) in enumerate(rows):
            base = i * width
            w = self.K // scale
            for k, a in irow.items():
                T[base + k] = a
                p1[k] -= w * a
            T[base + nv + i] = 1
            b_int = int(ib * self.L)
            T[base + width - 1] = b_int
            p1[width - 1] -= w * b_int
        self.C = 1
        if objective:
            cvals = {self.col_of[j]: Fraction(c) for j, c in objective.items() if j in self.col_of}
            self.C = _lcm_den(cvals.values())
            sign = -1 if maximize else 1
            base = m * width
            for k, c in cvals.items():
                T[base + k] = sign * int(c * self.C)
        T[(m + 1) * width:(m + 2) * width] = p1
        self.initial = T


def _run(tab: _Tableau, kernel, with_objective: bool):
    m, nv, width = tab.m, tab.nv, tab.width
    rows = tab.rows_total
    T = kernel.make_table(tab.initial)
    basis = kernel.make_table(range(nv, nv + m))
    d = 1
    status, d, it1 = kernel.simplex_loop(T, width, m, rows, m + 1, basis, d, nv + m)
    if status == OVERFLOW:
        raise OverflowError
    phase1 = Fraction(-int(T[(m + 1) * width + width - 1]), int(d))
    residual = phase1 / (tab.K * tab.L)
    iterations = it1
    if residual != 0:
        return "infeasible", None, residual, None, iterations
    # drive artificial variables out of the basis
    for i in range(m):
        if basis[i] < nv:
            continue
        base = i * width
        pick = -1
        for k in range(nv):
            if T[base + k] != 0:
                pick = k
                break
        if pick < 0:
            continue  # redundant row; the artificial stays basic at zero
        if T[base + pick] < 0:
            for j in range(base, base + width):
                T[j] = -T[j]
        d = kernel.pivot(T, width, rows, i, pick, d)
        basis[i] = pick
        iterations += 1
    status = OPTIMAL
    if with_objective:
        status, d, it2 = kernel.simplex_loop(T, width, m, rows, m, basis, d, nv)
        iterations += it2
        if status == OVERFLOW:
            raise OverflowError
        if status == UNBOUNDED:
            return "unbounded", None, Fraction(0), None, iterations
    x = [Fraction(0)] * tab.n
    for i in range(m):
        k = basis[i]
        if k < nv:
            x[tab.keep_cols[k]] = Fraction(int(T[i * width + width - 1]), int(d) * tab.L)
    value = None
    if with_objective:
        # row m holds -z in units of C * L (objective scaled by C, variables by L)
        value = Fraction(-int(T[m * width + width - 1]), int(d) * tab.C * tab.L)
    return "optimal", tuple(x), Fraction(0), value, iterations


def _solve(lp: LPProblem, objective=None, maximize=False) -> LPResult:
    fixed = _presolve(lp)
    tab = _Tableau(lp, objective, maximize, fixed)
    if tab.m == 0:
        # every constraint vanished; nonnegative vars at zero satisfy them
        x = tuple(Fraction(0) for _ in range(lp.num_vars))
        if objective:
            free = [c for j, c in objective.items() if j not in fixed]
            bad = any((c > 0) if maximize else (c < 0) for c in map(Fraction, free))
            if bad:
                return LPResult("unbounded", None, Fraction(0), backend="presolve")
            return LPResult("optimal", x, Fraction(0), Fraction(0), backend="presolve")
        return LPResult("optimal", x, Fraction(0), backend="presolve")
    kernels = [_kernels.active]
    if _kernels.active is not _kernels.python_kernel:
        kernels.append(_kernels.python_kernel)
    for kernel in kernels:
        try:
            status, x, residual, value, it = _run(tab, kernel, objective is not None)
        except OverflowError:
            continue
        if value is not None and maximize:
            value = -value
        name = "python" if kernel is _kernels.python_kernel else "cython"
        return LPResult(status, x, residual, value, it, name)
    raise RuntimeError("unreachable: the Python kernel cannot overflow")


def lp_feasible(lp: LPProblem) -> LPResult:
    """Phase-1 simplex.  ``result.feasible`` tells whether ``A x = b, x >= 0``
    has a solution; if so ``result.solution`` is a basic feasible point."""
    return _solve(lp)


def lp_optimize(lp: LPProblem, objective: Mapping[int, Fraction], maximize: bool = False) -> LPResult:
    """Optimize a linear objective (``{column: coefficient}``) over the LP."""
    return _solve(lp, dict(objective), maximize)


def check_solution(lp: LPProblem, x: Sequence[Fraction]) -> bool:
    """Exact check that *x* is nonnegative and satisfies every row."""
    if any(v < 0 for v in x):
        return False
    return all(sum((a * x[j] for j, a in row), Fraction(0)) == b for row, b in zip(lp.rows, lp.rhs))

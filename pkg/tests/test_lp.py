import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from cbd import _kernels, lp as lp_mod
from cbd.lp import LPProblem, check_solution, lp_feasible, lp_optimize

F = Fraction
needs_compiled = pytest.mark.skipif(_kernels.compiled_kernel is None, reason="extension not built")


def test_simple_feasible_and_infeasible():
    lp = LPProblem(2, [[(0, 1), (1, 1)], [(0, 1)]], [1, F(1, 3)])
    res = lp_feasible(lp)
    assert res.feasible and res.residual == 0
    assert res.solution == (F(1, 3), F(2, 3))
    bad = LPProblem(2, [[(0, 1), (1, 1)], [(0, 1)]], [1, F(3, 2)])
    res = lp_feasible(bad)
    assert not res.feasible and res.residual > 0 and res.solution is None


def test_optimize_and_unbounded():
    lp = LPProblem(3, [[(0, 1), (1, 1), (2, 1)]], [1])
    assert lp_optimize(lp, {0: 2, 1: 3, 2: 1}, maximize=True).value == 3
    assert lp_optimize(lp, {0: 2, 1: 3, 2: 1}).value == 1
    free = LPProblem(2, [[(0, 1), (1, -1)]], [0])
    assert lp_optimize(free, {0: 1}, maximize=True).status == "unbounded"
    assert lp_optimize(free, {0: 1}).value == 0


def test_presolve_fixes_zero_rows():
    lp = LPProblem(3, [[(0, 1), (1, 1)], [(0, 1), (1, 1), (2, 1)]], [0, 1])
    assert lp_feasible(lp).solution == (0, 0, 1)
    empty = LPProblem(2, [[(0, 1)]], [0])
    assert lp_optimize(empty, {1: 1}, maximize=True).status == "unbounded"
    assert lp_optimize(empty, {1: -1}, maximize=True).value == 0


def test_lp_problem_validation():
    with pytest.raises(ValueError):
        LPProblem(1, [[(1, 1)]], [0])
    with pytest.raises(ValueError):
        LPProblem(1, [[(0, 1)]], [])


def test_check_solution():
    lp = LPProblem(2, [[(0, 1), (1, 1)]], [1])
    assert check_solution(lp, [F(1, 2), F(1, 2)])
    assert not check_solution(lp, [F(3, 2), F(-1, 2)])
    assert not check_solution(lp, [F(1, 2), F(1, 3)])


def _random_lp(rng, m, n, denom=6):
    rows, rhs = [], []
    x0 = [F(rng.randint(0, 3), rng.randint(1, 4)) if rng.random() < 0.6 else F(0) for _ in range(n)]
    feasible = rng.random() < 0.6
    for _ in range(m):
        row = [(j, F(rng.randint(-4, 4), rng.randint(1, denom))) for j in range(n) if rng.random() < 0.7]
        b = sum((a * x0[j] for j, a in row), F(0))
        if not feasible:
            b += F(rng.randint(-3, 3), denom)
        rows.append(row)
        rhs.append(b)
    return LPProblem(n, rows, rhs)


def _scipy_feasible(lp):
    A = np.zeros((lp.num_rows, lp.num_vars))
    for i, row in enumerate(lp.rows):
        for j, a in row:
            A[i, j] += float(a)
    b = np.array([float(v) for v in lp.rhs])
    res = linprog(np.zeros(lp.num_vars), A_eq=A, b_eq=b, bounds=[(0, None)] * lp.num_vars, method="highs")
    return res.status == 0


def test_scipy_agreement():
    rng = random.Random(31)
    counts = {True: 0, False: 0}
    for _ in range(250):
        lp = _random_lp(rng, rng.randint(1, 5), rng.randint(1, 6))
        res = lp_feasible(lp)
        assert res.feasible == _scipy_feasible(lp)
        if res.feasible:
            assert check_solution(lp, res.solution)
        counts[res.feasible] += 1
    assert min(counts.values()) > 30


def _with_kernel(monkeypatch, kernel, fn):
    monkeypatch.setattr(_kernels, "active", kernel)
    return fn()


@needs_compiled
def test_kernels_agree(monkeypatch):
    rng = random.Random(32)
    for _ in range(150):
        lp = _random_lp(rng, rng.randint(1, 5), rng.randint(1, 6))
        obj = {j: F(rng.randint(-3, 3)) for j in range(lp.num_vars)}
        py = _with_kernel(monkeypatch, _kernels.python_kernel, lambda: lp_optimize(lp, obj))
        cy = _with_kernel(monkeypatch, _kernels.compiled_kernel, lambda: lp_optimize(lp, obj))
        assert (py.status, py.solution, py.value, py.residual) == (cy.status, cy.solution, cy.value, cy.residual)
        if py.backend != "presolve":
            assert py.backend == "python" and cy.backend == "cython"


@needs_compiled
def test_overflow_falls_back_to_python(monkeypatch):
    monkeypatch.setattr(_kernels, "active", _kernels.compiled_kernel)
    big = 10 ** 25
    lp = LPProblem(3, [[(0, big), (1, 1), (2, 3)], [(0, 1), (1, big + 7)]], [big + 4, big + 8])
    res = lp_feasible(lp)
    assert res.backend == "python"
    assert res.feasible and check_solution(lp, res.solution)


def test_determinism():
    rng = random.Random(33)
    lp = _random_lp(rng, 4, 6)
    first = lp_optimize(lp, {0: 1, 3: -1})
    for _ in range(3):
        again = lp_optimize(lp, {0: 1, 3: -1})
        assert (again.status, again.solution, again.value) == (first.status, first.solution, first.value)


def test_module_reports_backend():
    assert _kernels.BACKEND in ("cython", "python")
    assert lp_mod._kernels is _kernels

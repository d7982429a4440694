import itertools
import random
from fractions import Fraction

import pytest

from cbd.coupling import Coupling, check_categorical_splits_multimax
from cbd.decide import (
    CONTEXTUAL,
    NONCONTEXTUAL,
    build_feasibility_lp,
    connection_system,
    decide_aligned,
    decide_contextuality,
    decide_single_connection_cuts,
    decide_traditional,
    decide_unsplit,
    dominance_aligned,
    nominal_dominance,
    two_variable_categorical,
    verify_witness,
)
from cbd.errors import InconsistentlyConnected, LPTooLarge, MismatchedSupport, PlanIncomplete
from cbd.lp import check_solution
from cbd.model import ORDERED, ValueSpace, coarse_grain, make_system, single_connection, subsystem
from cbd.split import make_plan, plan_full_categorical, reduce_12
from gen import consistent_system, random_system, rand_pmf
from oracles import multimax_lp_oracle, nominal_dominates

F = Fraction
H = F(1, 2)
T = F(1, 10)

ROTATING_TRIPLE = [(H, H, 0), (0, H, H), (H, 0, H)]
MISALIGNED = [(7 * T, T, T, T), (T, 5 * T, 2 * T, 2 * T), (2 * T, 2 * T, 3 * T, 3 * T)]
TEN_ATOM_TABLE = ["aaaaaaabcd", "bbbbcdabcd", "bacdcdabcd"]


def test_prbox(corpus):
    s = corpus("prbox")
    v = decide_contextuality(s, "full")
    assert v.status == CONTEXTUAL and v.witness is None and v.residual > 0
    assert v.lp_shape == {"variables": 4, "bunch_rows": 4, "link_rows": 2}
    assert decide_contextuality(s, "full", atoms="full").lp_shape == {"variables": 16, "bunch_rows": 8, "link_rows": 2}
    assert decide_traditional(s).contextual


def test_four_valued_pair(corpus):
    s = corpus("four_valued_pair")
    # the {1,2} splits of both contents form a PR box
    assert decide_contextuality(s, "full").contextual
    v = decide_unsplit(s)
    assert v.noncontextual and verify_witness(s, v.witness, link="unsplit")
    assert v.lp_shape["variables"] == 4
    assert decide_unsplit(s, atoms="full").lp_shape["variables"] == 256
    f = {1: 1, 2: 1, 3: 0, 4: 0}
    g = coarse_grain(s, {q: f for q in s.contents})
    assert decide_contextuality(g, "full").contextual
    assert decide_unsplit(g).contextual
    with pytest.raises(InconsistentlyConnected):
        decide_traditional(s)


def test_four_context_binary(corpus):
    # contextual because its first two contexts form a PR box
    s = corpus("four_context_binary")
    assert decide_contextuality(s, "full").contextual
    sub = subsystem(s, {v for v in s.variables if v[1] in ("c1", "c2")})
    assert decide_contextuality(sub, "full").contextual


def test_rotating_triple_shapes_and_verdicts():
    cat = single_connection(ROTATING_TRIPLE, (1, 2, 3))
    v = decide_contextuality(cat, "full")
    assert v.contextual
    assert v.lp_shape == {"variables": 8, "bunch_rows": 6, "link_rows": 9}
    ordered = single_connection(ROTATING_TRIPLE, (1, 2, 3), ORDERED)
    v = decide_contextuality(ordered, "cuts")
    assert v.noncontextual and verify_witness(ordered, v.witness, "cuts")
    q = decide_single_connection_cuts(ROTATING_TRIPLE, (1, 2, 3))
    assert q.noncontextual and verify_witness(ordered, q.witness, "cuts")


def test_misaligned_connection():
    s = single_connection(MISALIGNED, "abcd")
    v = decide_contextuality(s, "full")
    assert v.noncontextual and verify_witness(s, v.witness, "full")
    table_coupling = Coupling.from_columns([tuple(r) for r in TEN_ATOM_TABLE], [T] * 10, s.variables)
    assert verify_witness(s, table_coupling, "full")
    assert check_categorical_splits_multimax(table_coupling)
    flp = build_feasibility_lp(s, "full")
    col = {a: k for k, a in enumerate(flp.atoms)}
    x = [F(0)] * flp.lp.num_vars
    for values, p in table_coupling.atoms:
        x[col[values]] += p
    assert check_solution(flp.lp, x)
    assert not dominance_aligned(MISALIGNED, "abcd")
    assert decide_aligned(MISALIGNED, "abcd") is None


def test_single_context_is_trivial():
    B = ValueSpace((0, 1))
    s = make_system({"a": B, "b": B}, [("c", ("a", "b"), {(0, 1): F(1, 3), (1, 1): F(2, 3)})])
    v = decide_contextuality(s, "full")
    assert v.noncontextual and v.lp_shape["link_rows"] == 0
    assert dict(v.witness.atoms) == {(0, 1): F(1, 3), (1, 1): F(2, 3)}


def test_consistent_product_system_traditional():
    B = ValueSpace((0, 1))
    prod = {(x, y): F(1, 4) for x in (0, 1) for y in (0, 1)}
    s = make_system({"a": B, "b": B}, [("c1", ("a", "b"), prod), ("c2", ("a", "b"), prod)])
    v = decide_traditional(s)
    assert v.noncontextual and verify_witness(s, v.witness, link="identity")


def test_lp_cap(monkeypatch, corpus):
    s = corpus("prbox")
    monkeypatch.setenv("CBD_MAX_ATOMS", "3")
    with pytest.raises(LPTooLarge):
        decide_contextuality(s, "full")
    monkeypatch.setenv("CBD_MAX_ATOMS", "4")
    assert decide_contextuality(s, "full").contextual
    monkeypatch.setenv("CBD_MAX_ATOMS", "lots")
    with pytest.raises(ValueError):
        decide_contextuality(s, "full")


def test_build_errors(corpus):
    s = corpus("prbox")
    with pytest.raises(PlanIncomplete):
        build_feasibility_lp(s, None, link="multimax")
    with pytest.raises(ValueError):
        build_feasibility_lp(s, "full", link="global")
    with pytest.raises(ValueError):
        build_feasibility_lp(s, "full", atoms="some")


def test_verify_witness_rejects_bad_couplings(corpus):
    s = single_connection([(H, H), (F(1, 4), F(3, 4))], (0, 1))
    indep = Coupling(s.variables, [((x, y), a * b) for x, a in zip((0, 1), (H, H)) for y, b in zip((0, 1), (F(1, 4), F(3, 4)))])
    res = verify_witness(s, indep, "full")
    assert not res and res.witness[0] == "link"
    other = single_connection([(H, H), (H, H)], (0, 1))
    res = verify_witness(other, indep, "full")
    assert not res and res.witness == ("bunch", 2)
    res = verify_witness(s, indep.restrict([s.variables[0]]), "full")
    assert not res and res.witness[0] == "variables"


def test_nominal_dominance_examples():
    p, q = (H, H, 0, 0), (0, 0, H, H)
    assert not nominal_dominance(p, q) and not nominal_dominance(q, p)
    assert nominal_dominance(p, p)
    with pytest.raises(MismatchedSupport):
        nominal_dominance((H, H), (1, 0, 0))
    with pytest.raises(MismatchedSupport):
        nominal_dominance({"a": 1}, {"z": 1}, labels="ab")


def test_three_values_always_dominate():
    grid = [p for p in itertools.product([F(i, 4) for i in range(5)], repeat=3) if sum(p) == 1]
    for p, q in itertools.product(grid, repeat=2):
        assert nominal_dominance(p, q) or nominal_dominance(q, p)


def test_dominance_aligned_examples():
    pmfs = [(H, F(1, 4), F(1, 4)), (F(1, 4), F(3, 8), F(3, 8)), (0, H, H)]
    res = dominance_aligned(pmfs, "abc")
    assert res and res.witness == ((0, 1, 2), "a")
    assert dominance_aligned([(1, 0)])
    v = decide_aligned(pmfs, "abc")
    s = connection_system(pmfs, "abc")
    assert v.noncontextual and verify_witness(s, v.witness, "full")


def test_two_variable_categorical_agrees_with_lp():
    rng = random.Random(41)
    seen = set()
    for _ in range(60):
        k = rng.randint(2, 5)
        p, q = rand_pmf(rng, k, 6), rand_pmf(rng, k, 6)
        v = two_variable_categorical(p, q)
        s = connection_system([p, q], range(k))
        assert v.status == decide_contextuality(s, "full").status
        assert v.noncontextual == (nominal_dominates(p, q) or nominal_dominates(q, p))
        if v.noncontextual:
            assert verify_witness(s, v.witness, "full")
        seen.add(v.status)
    assert seen == {CONTEXTUAL, NONCONTEXTUAL}
    disjoint = two_variable_categorical((H, H, 0, 0), (0, 0, H, H))
    assert disjoint.contextual
    assert decide_contextuality(connection_system([(H, H, 0, 0), (0, 0, H, H)], range(4)), "full").contextual


def test_full_plan_equals_12_plan_for_six_values():
    rng = random.Random(42)
    seen = set()
    for _ in range(8):
        pmfs = [rand_pmf(rng, 6, 6) for _ in range(2)]
        s = connection_system(pmfs, range(6))
        full = decide_contextuality(s, "full").status
        assert full == decide_contextuality(s, reduce_12(plan_full_categorical(s))).status
        assert full == decide_contextuality(s, "12").status
        seen.add(full)
    assert seen == {CONTEXTUAL, NONCONTEXTUAL}


def test_relabeling_invariance():
    rng = random.Random(43)
    for _ in range(30):
        k = rng.randint(3, 4)
        pmfs = [rand_pmf(rng, k, 4) for _ in range(rng.randint(2, 3))]
        perm = list(range(k))
        rng.shuffle(perm)
        a = connection_system(pmfs, range(k))
        b = connection_system(pmfs, perm)
        assert decide_contextuality(a, "full").status == decide_contextuality(b, "full").status


def _oracle_inputs(system, plan):
    bunches = [(ctx.measures, dict(ctx.bunch)) for ctx in system.contexts]
    spaces = {q: system.space(q).labels for q in system.contents}
    return bunches, spaces, {q: plan[q] for q in system.contents}


def test_lp_matches_float_oracle_and_witnesses_verify():
    rng = random.Random(44)
    counts = {CONTEXTUAL: 0, NONCONTEXTUAL: 0}
    for _ in range(80):
        s = random_system(rng, n_contents=(1, 2), n_contexts=(2, 3), k=(2, 3))
        plan = make_plan(s, "allowable")
        v = decide_contextuality(s, plan)
        assert v.noncontextual == multimax_lp_oracle(*_oracle_inputs(s, plan))
        if v.noncontextual:
            assert verify_witness(s, v.witness, plan)
        counts[v.status] += 1
    assert min(counts.values()) >= 5


def test_traditional_matches_identity_oracle():
    rng = random.Random(45)
    for _ in range(30):
        s = consistent_system(rng, n_contents=(1, 2), n_contexts=(2, 3), k=(2, 3))
        v = decide_traditional(s)
        bunches, spaces, _ = _oracle_inputs(s, make_plan(s, "allowable"))
        assert v.noncontextual == multimax_lp_oracle(bunches, spaces, {}, link="identity")
        if v.noncontextual:
            assert verify_witness(s, v.witness, link="identity")


def test_decisions_are_deterministic():
    s = single_connection(MISALIGNED, "abcd")
    a = decide_contextuality(s, "full")
    b = decide_contextuality(s, "full")
    assert a.witness == b.witness and a.lp_shape == b.lp_shape

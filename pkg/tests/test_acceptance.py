"""Acceptance criteria, one test each.  Every test records a PASS/FAIL line
(printed in the terminal summary) and must finish within ten seconds."""
import itertools
import random
import time
from contextlib import contextmanager
from fractions import Fraction

from cbd import _kernels
from cbd.cli import main
from cbd.coupling import (
    CdfTable,
    Coupling,
    check_categorical_splits_multimax,
    check_multimaximal_binary,
    forbidden_region_check,
    multimaximal_binary,
    quantile_coupling,
)
from cbd.decide import (
    build_feasibility_lp,
    decide_aligned,
    decide_contextuality,
    decide_traditional,
    decide_unsplit,
    dominance_aligned,
    two_variable_categorical,
    verify_witness,
)
from cbd.lp import LPProblem, check_solution, lp_optimize
from cbd.model import (
    CATEGORICAL,
    ORDERED,
    add_deterministic,
    coarse_grain,
    drop_variable,
    is_consistently_connected,
    is_deterministic,
    single_connection,
    subsystem,
)
from cbd.split import plan_full_categorical, reduce_12
from cbd.vspace import Dichotomy, VSpace, allowable_dichotomizations, cross_space, is_allowable_coarse_graining
from conftest import ACCEPTANCE_LINES, corpus_path
from gen import consistent_system, deterministic_system, rand_format, rand_pmf, random_system, quarter_pmfs
from oracles import nominal_dominates

F = Fraction
T = F(1, 10)
BUDGET = 10.0


@contextmanager
def criterion(number, summary):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        elapsed = time.perf_counter() - start
        _record(f"FAIL criterion {number}: {summary} ({elapsed:.2f}s)")
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < BUDGET
    verdict = "PASS" if ok else "FAIL"
    _record(f"{verdict} criterion {number}: {summary} ({elapsed:.2f}s, {_kernels.BACKEND} kernel)")
    assert ok, f"criterion {number} took {elapsed:.2f}s, over the {BUDGET:.0f}s budget"


def _record(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def _cli(*argv):
    return main(["--quiet", *map(str, argv)])


def test_criterion_01_prbox(corpus, capsys):
    with criterion(1, "PR box is contextual under the full plan and traditionally"):
        s = corpus("prbox")
        assert decide_contextuality(s, "full").contextual
        assert decide_traditional(s).contextual
        assert _cli("decide", corpus_path("prbox"), "--plan", "full") == 1
        assert _cli("decide", corpus_path("prbox"), "--traditional") == 1
        capsys.readouterr()


def test_criterion_02_coarse_graining_pair(corpus):
    with criterion(2, "four-valued pair noncontextual with verified witness; its coarse-graining contextual"):
        s = corpus("four_valued_pair")
        v = decide_unsplit(s)
        assert v.noncontextual
        assert v.witness.is_coupling_of({var: s.distribution(*var) for var in s.variables})
        assert verify_witness(s, v.witness, link="unsplit")
        f = {1: 1, 2: 1, 3: 0, 4: 0}
        g = coarse_grain(s, {q: f for q in s.contents})
        assert g.context("c1").bunch == {(1, 1): F(1, 2), (0, 0): F(1, 2)}
        assert g.context("c2").bunch == {(1, 0): F(1, 2), (0, 1): F(1, 2)}
        assert decide_contextuality(g, "full").contextual
        assert decide_unsplit(g).contextual
        # under every dichotomization the {1,2} splits already form a PR box
        assert decide_contextuality(s, "full").contextual


def test_criterion_03_rotating_triple(corpus):
    with criterion(3, "rotating triple: full plan contextual, ordered cuts noncontextual"):
        cat = corpus("rotating_triple")
        assert decide_contextuality(cat, "full").contextual
        ordered = corpus("rotating_triple_ordered")
        v = decide_contextuality(ordered, "cuts")
        assert v.noncontextual and verify_witness(ordered, v.witness, "cuts")


def test_criterion_04_misaligned_connection(corpus):
    with criterion(4, "misaligned four-value connection noncontextual; ten-atom coupling satisfies the LP"):
        s = corpus("dominance_misaligned")
        v = decide_contextuality(s, "full")
        assert v.noncontextual and verify_witness(s, v.witness, "full")
        table = ["aaaaaaabcd", "bbbbcdabcd", "bacdcdabcd"]
        table_coupling = Coupling.from_columns([tuple(r) for r in table], [T] * 10, s.variables)
        flp = build_feasibility_lp(s, "full")
        col = {a: k for k, a in enumerate(flp.atoms)}
        x = [F(0)] * flp.lp.num_vars
        for values, p in table_coupling.atoms:
            x[col[values]] += p
        assert check_solution(flp.lp, x)
        assert check_categorical_splits_multimax(table_coupling)
        assert verify_witness(s, table_coupling, "full")


def test_criterion_05_cross():
    with criterion(5, "cross space: 13 of 15 dichotomies allowable"):
        s = cross_space()
        every = {Dichotomy.of(s, A) for r in range(1, 5) for A in itertools.combinations(s.ground, r)}
        allowed = set(allowable_dichotomizations(s))
        assert len(every) == 15 and len(allowed) == 13
        assert every - allowed == {Dichotomy.of(s, {"left", "right"}), Dichotomy.of(s, {"up", "down"})}


def test_criterion_06_ordered_connections():
    with criterion(6, "200 random ordered connections noncontextual under cuts; quantile witnesses pass"):
        rng = random.Random(601)
        for _ in range(200):
            n = rng.randint(2, 4)
            k = rng.randint(2, 5)
            labels = tuple(range(k))
            pmfs = [rand_pmf(rng, k, 12) for _ in range(n)]
            s = single_connection(pmfs, labels, ORDERED)
            v = decide_contextuality(s, "cuts")
            assert v.noncontextual and verify_witness(s, v.witness, "cuts")
            cdfs = [CdfTable.from_pmf(dict(zip(labels, p)), labels) for p in pmfs]
            c = quantile_coupling(cdfs)
            for i, j in itertools.combinations(range(n), 2):
                assert forbidden_region_check(cdfs[i], cdfs[j], c.restrict([i, j]))
            witness = Coupling(s.variables, c.atoms)
            assert verify_witness(s, witness, "cuts")


def _uniqueness_lp(ps):
    n = len(ps)
    cells = list(itertools.product((0, 1), repeat=n))
    rows = [[(a, 1) for a in range(len(cells))]]
    rhs = [1]
    for i in range(n):
        rows.append([(a, 1) for a, v in enumerate(cells) if v[i]])
        rhs.append(ps[i])
    for i, j in itertools.combinations(range(n), 2):
        rows.append([(a, 1) for a, v in enumerate(cells) if v[i] and v[j]])
        rhs.append(min(ps[i], ps[j]))
    return cells, LPProblem(len(cells), rows, rhs)


def test_criterion_07_binary_families():
    with criterion(7, "200 binary families multimaximal; uniqueness confirmed by LP for n <= 3"):
        rng = random.Random(701)
        unique_checked = 0
        for _ in range(200):
            n = rng.randint(1, 5)
            ps = [F(rng.randint(0, 12), 12) for _ in range(n)]
            c = multimaximal_binary(ps)
            assert check_multimaximal_binary(c, ps)
            for i, j in itertools.combinations(range(n), 2):
                joint = c.joint(i, j)
                assert joint.get((0, 0), 0) == min(1 - ps[i], 1 - ps[j])
                lo, hi = (i, j) if ps[i] <= ps[j] else (j, i)
                assert c.joint(lo, hi).get((1, 0), 0) == 0
            if n <= 3:
                cells, lp = _uniqueness_lp(ps)
                stair = dict(c.atoms)
                for a, cell in enumerate(cells):
                    assert lp_optimize(lp, {a: 1}, maximize=True).value == stair.get(cell, 0)
                    assert lp_optimize(lp, {a: 1}).value == stair.get(cell, 0)
                unique_checked += 1
        assert unique_checked >= 50


def _orbit_key(pmfs, k):
    counts = [tuple(int(x * 4) for x in p) for p in pmfs]
    return min(tuple(sorted(tuple(c[i] for i in perm) for c in counts)) for perm in itertools.permutations(range(k)))


def _orbits(k, n):
    """One representative per class of n-multisets of quarter pmfs under relabeling."""
    seen = set()
    for combo in itertools.combinations_with_replacement(quarter_pmfs(k), n):
        key = _orbit_key(combo, k)
        if key not in seen:
            seen.add(key)
            yield [tuple(F(c, 4) for c in p) for p in key]


def test_criterion_08_categorical_grids():
    # every verdict and test below is invariant under relabeling values and
    # reordering variables, so one connection per orbit covers the grid
    with criterion(8, "quarter grids k <= 4, n <= 3: dominance, alignment and 1-2 plan agree with the LP"):
        checked = 0
        for k in (2, 3, 4):
            labels = tuple(range(k))
            for n in (2, 3):
                for pmfs in _orbits(k, n):
                    s = single_connection(pmfs, labels, CATEGORICAL)
                    full = decide_contextuality(s, "full")
                    twelve = decide_contextuality(s, reduce_12(plan_full_categorical(s)))
                    assert full.status == twelve.status
                    if full.noncontextual:
                        assert verify_witness(s, full.witness, "full")
                    if n == 2:
                        p, q = pmfs
                        dominance = nominal_dominates(p, q) or nominal_dominates(q, p)
                        assert full.noncontextual == dominance
                        v = two_variable_categorical(p, q)
                        assert v.noncontextual == dominance
                        if dominance:
                            assert verify_witness(s, v.witness, "full")
                    if dominance_aligned(pmfs):
                        assert full.noncontextual
                        assert verify_witness(s, decide_aligned(pmfs).witness, "full")
                    checked += 1
        assert checked > 500
        # beyond five values the 1-2 plan is a proper subset of the full plan
        rng = random.Random(801)
        for _ in range(10):
            pmfs = [rand_pmf(rng, 6, 4) for _ in range(rng.randint(2, 3))]
            s = single_connection(pmfs, tuple(range(6)), CATEGORICAL)
            assert decide_contextuality(s, "full").status == decide_contextuality(s, "12").status


def _random_allowable_map(rng, space):
    labels = space.labels
    k = len(labels)
    m = rng.randint(1, k)
    if space.kind == ORDERED:
        cuts = sorted(rng.sample(range(1, k), m - 1))
        return {x: sum(i >= c for c in cuts) for i, x in enumerate(labels)}
    images = list(range(m)) + [rng.randrange(m) for _ in range(k - m)]
    rng.shuffle(images)
    return dict(zip(labels, images))


def _noncontextual_systems(rng, count):
    out = []
    while len(out) < count:
        s = random_system(rng)
        v = decide_contextuality(s, "allowable")
        if v.noncontextual:
            out.append((s, v))
    return out


def test_criterion_09_principles():
    with criterion(9, "nestedness, deterministic redundancy, analyticity and coarse-graining on 100 systems each"):
        rng = random.Random(901)
        # noncontextual nestedness
        for s, v in _noncontextual_systems(rng, 100):
            keep = [x for x in s.variables if rng.random() < 0.6] or [rng.choice(s.variables)]
            sub = subsystem(s, keep)
            sv = decide_contextuality(sub, "allowable")
            assert sv.noncontextual
            assert verify_witness(sub, v.witness.restrict(sub.variables), "allowable")
        # deterministic redundancy
        for _ in range(100):
            s = random_system(rng)
            status = decide_contextuality(s, "allowable").status
            q = rng.choice(list(s.contents))
            label = rng.choice(s.space(q).labels)
            grown = add_deterministic(s, q, "extra", label)
            assert decide_contextuality(grown, "allowable").status == status
            assert drop_variable(grown, q, "extra").variables == s.variables
            for var in s.variables:
                if is_deterministic(s, *var) and len(s.variables) > 1:
                    shrunk = drop_variable(s, *var)
                    assert decide_contextuality(shrunk, "allowable").status == status
                    break
        # analyticity
        inconsistent = 0
        for _ in range(100):
            contents, measures = rand_format(rng)
            s = deterministic_system(rng, contents, measures)
            inconsistent += not is_consistently_connected(s)
            assert decide_contextuality(s, "allowable").noncontextual
        assert inconsistent >= 50
        # coarse-graining with allowable maps
        for s, _ in _noncontextual_systems(rng, 100):
            maps = {}
            for q in s.contents:
                f = _random_allowable_map(rng, s.space(q))
                maps[q] = f
            g = coarse_grain(s, maps)
            for q, f in maps.items():
                src = VSpace.from_value_space(s.space(q))
                dst = VSpace.from_value_space(g.space(q))
                assert is_allowable_coarse_graining(src, dst, f)
            assert decide_contextuality(g, "allowable").noncontextual


def test_criterion_10_specialization():
    with criterion(10, "100 consistently connected systems: split verdict equals traditional verdict"):
        rng = random.Random(1001)
        statuses = []
        for _ in range(100):
            s = consistent_system(rng)
            assert is_consistently_connected(s)
            a = decide_contextuality(s, "allowable").status
            b = decide_traditional(s).status
            assert a == b
            statuses.append(a)
        assert "noncontextual" in statuses

"""Contextuality decisions.

The main route asks whether a system has a coupling whose split connections
are multimaximal.  Unknowns are the probabilities of global atoms, one value
per variable ``(q, c)``; equalities pin every bunch and every pairwise
maximality condition.  The LP is solved exactly (see :mod:`cbd.lp`).
"""
from __future__ import annotations

import itertools
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .coupling import (
    CdfTable,
    Coupling,
    check_multimaximal_binary,
    dichotomize,
    nested_events_coupling,
    quantile_coupling,
)
from .errors import InconsistentlyConnected, LPTooLarge, MismatchedSupport, PlanIncomplete
from .lp import LPProblem, LPResult, lp_feasible
from .model import CATEGORICAL, ORDERED, CheckResult, System, as_rational, is_consistently_connected, single_connection
from .split import SplitPlan, make_plan, split_system

NONCONTEXTUAL = "noncontextual"
CONTEXTUAL = "contextual"

LINKS = ("multimax", "identity", "unsplit")
DEFAULT_MAX_ATOMS = 10**6


def max_atoms() -> int:
    raw = os.environ.get("CBD_MAX_ATOMS")
    if not raw:
        return DEFAULT_MAX_ATOMS
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"CBD_MAX_ATOMS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("CBD_MAX_ATOMS must be positive")
    return value


@dataclass(frozen=True)
class FeasibilityLP:
    """An LP plus the bookkeeping needed to read a coupling off its solution.

    ``atoms[k]`` is the global atom of column ``k``: one value per entry of
    ``variables``.  ``kinds[i]`` tags row ``i`` as ``"bunch"`` or ``"link"``.
    """

    lp: LPProblem
    variables: tuple
    atoms: tuple
    kinds: tuple

    @property
    def shape(self) -> dict:
        return {
            "variables": self.lp.num_vars,
            "bunch_rows": self.kinds.count("bunch"),
            "link_rows": self.kinds.count("link"),
        }

    def coupling(self, solution: Sequence[Fraction]) -> Coupling:
        return Coupling(self.variables, tuple((a, p) for a, p in zip(self.atoms, solution) if p))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a decision.

    ``witness`` is a :class:`Coupling` over the system's variables when the
    status is noncontextual.  ``residual`` is the phase-1 optimum, positive
    iff the LP is infeasible; it is a solver diagnostic, not a measure of
    contextuality.
    """

    status: str
    witness: Coupling | None = None
    residual: Fraction = Fraction(0)
    method: str = "lp"
    plan: SplitPlan | None = None
    lp_shape: dict = field(default_factory=dict)

    @property
    def noncontextual(self) -> bool:
        return self.status == NONCONTEXTUAL

    @property
    def contextual(self) -> bool:
        return self.status == CONTEXTUAL


def _resolve_plan(system: System, plan) -> SplitPlan:
    if isinstance(plan, str):
        plan = make_plan(system, plan)
    split_system(system, plan)  # raises PlanIncomplete / NotDetermining
    return plan


def _global_atoms(system: System, atoms: str):
    """Global atoms and, per context, the slice of positions it owns."""
    spans = []
    start = 0
    for ctx in system.contexts:
        spans.append((ctx, start, start + len(ctx.measures)))
        start += len(ctx.measures)
    cap = max_atoms()
    if atoms == "support":
        count = 1
        for ctx in system.contexts:
            count *= len(ctx.atoms)
        if count > cap:
            raise LPTooLarge(f"{count} global atoms exceed the cap of {cap}; "
                             "set CBD_MAX_ATOMS, use the 1-2 plan, or analyse a subsystem")
        pools = [[v for v, _ in ctx.atoms] for ctx in system.contexts]
        glob = [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*pools)]
    elif atoms == "full":
        pools = [system.space(q).labels for q, _ in system.variables]
        count = 1
        for p in pools:
            count *= len(p)
        if count > cap:
            raise LPTooLarge(f"{count} global atoms exceed the cap of {cap}; set CBD_MAX_ATOMS")
        glob = list(itertools.product(*pools))
    else:
        raise ValueError(f"atoms must be 'support' or 'full', not {atoms!r}")
    return glob, spans


def _pairs(system: System, q):
    return itertools.combinations(system.contexts_of(q), 2)


def build_feasibility_lp(system: System, plan=None, *, atoms: str = "support",
                         link: str = "multimax") -> FeasibilityLP:
    """Equalities for a coupling whose connections satisfy the *link* condition.

    ``link="multimax"`` needs a plan: for every ``A`` in the plan and every
    pair of contexts sharing ``q``, ``Pr[both in A] = min(Pr[R_q^c in A],
    Pr[R_q^c' in A])``.  ``"identity"`` forces ``Pr[R_q^c != R_q^c'] = 0``;
    ``"unsplit"`` asks for pairwise maximal couplings of the original
    variables, ``Pr[equal] = sum_x min(p_c(x), p_c'(x))``.

    ``atoms="support"`` uses the product of bunch supports; ``"full"`` the
    product of all value sets (bunch rows then cover zero cells too).
    """
    if link not in LINKS:
        raise ValueError(f"link must be one of {LINKS}, not {link!r}")
    if link == "multimax":
        if plan is None:
            raise PlanIncomplete("the multimax link needs a split plan")
        plan = _resolve_plan(system, plan)
    glob, spans = _global_atoms(system, atoms)
    pos = {v: i for i, v in enumerate(system.variables)}
    row_cols: dict = {}
    row_rhs: dict = {}
    kinds: dict = {}

    # bunch rows
    for ctx, lo, hi in spans:
        if atoms == "full":
            cells = itertools.product(*(system.space(q).labels for q in ctx.measures))
        else:
            cells = (v for v, _ in ctx.atoms)
        for v in cells:
            key = ("bunch", ctx.id, tuple(v))
            row_cols[key] = []
            row_rhs[key] = ctx.bunch.get(tuple(v), Fraction(0))
            kinds[key] = "bunch"
    for k, a in enumerate(glob):
        for ctx, lo, hi in spans:
            row_cols[("bunch", ctx.id, a[lo:hi])].append(k)

    # link rows
    links = []
    for q in system.contents:
        for c1, c2 in _pairs(system, q):
            i, j = pos[(q, c1)], pos[(q, c2)]
            d1, d2 = system.distribution(q, c1), system.distribution(q, c2)
            if link == "multimax":
                for A in plan[q]:
                    A = frozenset(A)
                    p1 = sum((p for x, p in d1.items() if x in A), Fraction(0))
                    p2 = sum((p for x, p in d2.items() if x in A), Fraction(0))
                    links.append((("link", q, A, c1, c2), min(p1, p2),
                                  lambda a, i=i, j=j, A=A: a[i] in A and a[j] in A))
            elif link == "identity":
                links.append((("link", q, c1, c2), Fraction(0), lambda a, i=i, j=j: a[i] != a[j]))
            else:
                agree = sum((min(p, d2.get(x, Fraction(0))) for x, p in d1.items()), Fraction(0))
                links.append((("link", q, c1, c2), agree, lambda a, i=i, j=j: a[i] == a[j]))
    for key, rhs, test in links:
        row_cols[key] = [k for k, a in enumerate(glob) if test(a)]
        row_rhs[key] = rhs
        kinds[key] = "link"

    keys = list(row_cols)
    lp = LPProblem(
        len(glob),
        tuple(tuple((k, 1) for k in row_cols[key]) for key in keys),
        tuple(row_rhs[key] for key in keys),
        tuple(keys),
    )
    return FeasibilityLP(lp, system.variables, tuple(glob), tuple(kinds[key] for key in keys))


def _decide(system: System, flp: FeasibilityLP, method: str, plan=None) -> Verdict:
    result: LPResult = lp_feasible(flp.lp)
    if result.feasible:
        return Verdict(NONCONTEXTUAL, flp.coupling(result.solution), Fraction(0), method, plan, flp.shape)
    return Verdict(CONTEXTUAL, None, result.residual, method, plan, flp.shape)


def decide_contextuality(system: System, plan="full", *, atoms: str = "support") -> Verdict:
    """Noncontextual iff some coupling has multimaximal split connections under *plan*.

    *plan* is a :class:`SplitPlan` or a plan name (``full``, ``cuts``,
    ``allowable``, ``12``).
    """
    plan = _resolve_plan(system, plan)
    flp = build_feasibility_lp(system, plan, atoms=atoms, link="multimax")
    return _decide(system, flp, "lp", plan)


def decide_unsplit(system: System, *, atoms: str = "support") -> Verdict:
    """Noncontextual iff some coupling has pairwise maximal connections of the
    original, undichotomized variables."""
    return _decide(system, build_feasibility_lp(system, atoms=atoms, link="unsplit"), "unsplit")


def decide_traditional(system: System, *, atoms: str = "support") -> Verdict:
    """Classical test for consistently connected systems: identity couplings."""
    check = is_consistently_connected(system)
    if not check:
        q, c1, c2 = check.witness
        raise InconsistentlyConnected(
            f"content {q!r} is distributed differently in contexts {c1!r} and {c2!r}; "
            "identity couplings do not exist")
    return _decide(system, build_feasibility_lp(system, atoms=atoms, link="identity"), "traditional")


def verify_witness(system: System, witness: Coupling, plan=None, *, link: str = "multimax") -> CheckResult:
    """Check a claimed coupling directly, without the LP.

    Failure witnesses: ``("variables", ...)``, ``("bunch", context)`` or
    ``("link", content, subset_or_None, c1, c2)``.
    """
    if set(witness.variables) != set(system.variables) or len(witness.variables) != len(system.variables):
        return CheckResult(False, ("variables", witness.variables))
    for ctx in system.contexts:
        got = witness.joint(*((q, ctx.id) for q in ctx.measures))
        if got != dict(ctx.bunch):
            return CheckResult(False, ("bunch", ctx.id))
    if link == "multimax":
        plan = _resolve_plan(system, "full" if plan is None else plan)
        for q in system.contents:
            cids = system.contexts_of(q)
            if len(cids) < 2:
                continue
            vars_q = [(q, c) for c in cids]
            for A in plan[q]:
                binary = dichotomize(witness.restrict(vars_q), {v: [A] for v in vars_q})
                res = check_multimaximal_binary(binary)
                if not res:
                    i, j = res.witness
                    return CheckResult(False, ("link", q, tuple(A), cids[i], cids[j]))
    else:
        for q in system.contents:
            for c1, c2 in _pairs(system, q):
                joint = witness.joint((q, c1), (q, c2))
                agree = sum((p for (x, y), p in joint.items() if x == y), Fraction(0))
                if link == "identity":
                    want = Fraction(1)
                else:
                    d1, d2 = system.distribution(q, c1), system.distribution(q, c2)
                    want = sum((min(p, d2.get(x, Fraction(0))) for x, p in d1.items()), Fraction(0))
                if agree != want:
                    return CheckResult(False, ("link", q, None, c1, c2))
    return CheckResult(True)


# categorical and ordered single connections

def _pmf_vectors(pmfs: Sequence, labels: Sequence | None):
    if all(isinstance(p, Mapping) for p in pmfs):
        if labels is None:
            seen = {}
            for p in pmfs:
                seen.update(dict.fromkeys(p))
            labels = tuple(seen)
        labels = tuple(labels)
        allowed = set(labels)
        for p in pmfs:
            if set(p) - allowed:
                raise MismatchedSupport(f"pmf has values {sorted(map(str, set(p) - allowed))} outside {labels!r}")
        return labels, [tuple(as_rational(p.get(x, 0)) for x in labels) for p in pmfs]
    lengths = {len(p) for p in pmfs}
    if len(lengths) > 1:
        raise MismatchedSupport("pmfs are over value sets of different sizes")
    k = lengths.pop() if lengths else 0
    labels = tuple(range(k)) if labels is None else tuple(labels)
    if len(labels) != k:
        raise MismatchedSupport("labels and pmf length differ")
    return labels, [tuple(as_rational(v) for v in p) for p in pmfs]


def nominal_dominance(p, q, labels: Sequence | None = None) -> bool:
    """``p`` nominally dominates ``q``: ``p(i) < q(i)`` at no more than one value."""
    _, (pv, qv) = _pmf_vectors([p, q], labels)
    return sum(a < b for a, b in zip(pv, qv)) <= 1


def dominance_aligned(pmfs: Sequence, labels: Sequence | None = None) -> CheckResult:
    """Find an order of the pmfs that is nondecreasing at all values but one.

    The witness is ``(permutation, exceptional_label)`` when aligned.
    """
    labels, vecs = _pmf_vectors(list(pmfs), labels)
    n, k = len(vecs), len(labels)
    if n == 0 or k == 0:
        return CheckResult(True, (tuple(range(n)), labels[0] if labels else None))
    for e in range(k):
        keep = [i for i in range(k) if i != e]
        order = sorted(range(n), key=lambda c: (tuple(vecs[c][i] for i in keep), c))
        if all(vecs[a][i] <= vecs[b][i] for a, b in zip(order, order[1:]) for i in keep):
            return CheckResult(True, (tuple(order), labels[e]))
    return CheckResult(False)


def two_variable_categorical(p, q, labels: Sequence | None = None) -> Verdict:
    """Two-variable categorical connection: noncontextual iff one pmf nominally
    dominates the other.  The witness is a nested-events coupling."""
    labels, (pv, qv) = _pmf_vectors([p, q], labels)
    if nominal_dominance(pv, qv, labels):
        first, second = (1, 0)  # q then p is nondecreasing off the exception
    elif nominal_dominance(qv, pv, labels):
        first, second = (0, 1)
    else:
        return Verdict(CONTEXTUAL, None, Fraction(0), "dominance")
    vecs = (pv, qv)
    aligned = [dict(zip(labels, vecs[first])), dict(zip(labels, vecs[second]))]
    nested = nested_events_coupling(aligned, labels, variables=(("q", first + 1), ("q", second + 1)))
    return Verdict(NONCONTEXTUAL, nested.restrict((("q", 1), ("q", 2))), Fraction(0), "dominance")


def decide_aligned(pmfs: Sequence, labels: Sequence | None = None) -> Verdict | None:
    """Noncontextual verdict with a nested-events witness, or ``None`` when the
    connection is not dominance-aligned (the test is only sufficient)."""
    labels, vecs = _pmf_vectors(list(pmfs), labels)
    found = dominance_aligned(vecs, labels)
    if not found:
        return None
    order, exceptional = found.witness
    n = len(vecs)
    coupling = nested_events_coupling(
        [dict(zip(labels, vecs[c])) for c in order], labels, exceptional,
        variables=tuple(("q", c + 1) for c in order))
    witness = coupling.restrict(tuple(("q", c + 1) for c in range(n)))
    return Verdict(NONCONTEXTUAL, witness, Fraction(0), "aligned")


def decide_single_connection_cuts(pmfs: Sequence, labels: Sequence) -> Verdict:
    """Ordered single connection under the cut plan: always noncontextual, with
    the quantile coupling as witness."""
    labels, vecs = _pmf_vectors(list(pmfs), labels)
    cdfs = [CdfTable.from_pmf(dict(zip(labels, v)), labels) for v in vecs]
    variables = tuple(("q", c + 1) for c in range(len(vecs)))
    return Verdict(NONCONTEXTUAL, quantile_coupling(cdfs, variables), Fraction(0), "quantile")


def connection_system(pmfs: Sequence, labels: Sequence, kind: str = CATEGORICAL) -> System:
    """Single-connection system (content ``"q"``, contexts ``1..n``)."""
    labels, vecs = _pmf_vectors(list(pmfs), labels)
    if kind not in (CATEGORICAL, ORDERED):
        raise ValueError(f"unknown kind {kind!r}")
    return single_connection(vecs, labels, kind)

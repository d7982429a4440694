"""Split representations: replacing each variable by binary indicators.

A plan assigns to each content ``q`` a family of canonical subsets ``A`` of
its value set; the split system measures ``[R_q^c in A]`` for every ``A`` in
that family, in every context that measures ``q``.  A subset is canonical
when it contains the least label (declared order), so a family never holds a
subset together with its complement.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, NamedTuple

from .errors import NotCategorical, NotDetermining, NotOrdered, PlanIncomplete, UnknownContent, UnknownLabel
from .model import CATEGORICAL, ORDERED, Context, System, ValueSpace
from .vspace import VSpace, allowable_dichotomizations

BINARY = ValueSpace((0, 1), CATEGORICAL)


class SplitContent(NamedTuple):
    """Content ``(q, A)`` of a split system; ``subset`` lists ``A`` in label order."""

    content: Hashable
    subset: tuple

    def __str__(self):
        return f"{self.content}:{{{','.join(map(str, self.subset))}}}"


def canonical(labels: tuple, subset: Iterable) -> tuple:
    """The cell of ``{A, E - A}`` holding ``labels[0]``, in label order."""
    s = set(subset)
    unknown = s - set(labels)
    if unknown:
        raise UnknownLabel(f"labels {sorted(map(str, unknown))} are outside {labels!r}")
    if not s or len(s) == len(labels):
        raise ValueError("a dichotomizing subset must be proper and nonempty")
    if labels[0] not in s:
        s = set(labels) - s
    return tuple(x for x in labels if x in s)


@dataclass(frozen=True)
class SplitPlan:
    """``families[q]`` is a tuple of canonical subsets (tuples in label order)."""

    families: Mapping
    labels: Mapping

    def __post_init__(self):
        fams = {}
        for q, fam in self.families.items():
            if q not in self.labels:
                raise UnknownContent(f"plan names content {q!r} without its labels")
            labels = tuple(self.labels[q])
            seen = dict.fromkeys(canonical(labels, A) for A in fam)
            fams[q] = tuple(seen)
        object.__setattr__(self, "families", fams)
        object.__setattr__(self, "labels", {q: tuple(v) for q, v in self.labels.items()})

    def __getitem__(self, q) -> tuple:
        return self.families[q]

    def __contains__(self, q) -> bool:
        return q in self.families

    def sizes(self) -> dict:
        return {q: len(f) for q, f in self.families.items()}

    def restrict(self, contents: Iterable) -> SplitPlan:
        keep = set(contents)
        return SplitPlan({q: f for q, f in self.families.items() if q in keep},
                         {q: l for q, l in self.labels.items() if q in keep})


def _labels(system: System) -> dict:
    return {q: space.labels for q, space in system.contents.items()}


def _support_union(system: System, q) -> set:
    out = set()
    for cid in system.contexts_of(q):
        out.update(system.distribution(q, cid))
    return out


def plan_full_categorical(system: System) -> SplitPlan:
    """Every dichotomization of every (categorical) content."""
    fams = {}
    for q, space in system.contents.items():
        if space.kind != CATEGORICAL:
            raise NotCategorical(f"content {q!r} is {space.kind}; the full plan needs categorical contents")
        first, rest = space.labels[0], space.labels[1:]
        fam = []
        for r in range(0, len(rest)):
            for combo in itertools.combinations(rest, r):
                fam.append((first,) + combo)
        fams[q] = fam
    return SplitPlan(fams, _labels(system))


def plan_cuts(system: System) -> SplitPlan:
    """Cuts ``{y <= x}`` at every support point of the connection but the top one."""
    fams = {}
    for q, space in system.contents.items():
        if space.kind != ORDERED:
            raise NotOrdered(f"content {q!r} is {space.kind}; the cut plan needs ordered contents")
        support = sorted(_support_union(system, q), key=space.index)
        fams[q] = [space.labels[: space.index(x) + 1] for x in support[:-1]]
    return SplitPlan(fams, _labels(system))


def plan_allowable(system: System) -> SplitPlan:
    """Dichotomizations whose cells are linked in the content's V-space."""
    fams = {}
    for q, space in system.contents.items():
        if len(space) == 1:
            fams[q] = []
            continue
        vs = VSpace.from_value_space(space)
        fams[q] = [tuple(x for x in space.labels if x in d.part0) for d in allowable_dichotomizations(vs)]
    return SplitPlan(fams, _labels(system))


def reduce_12(plan: SplitPlan) -> SplitPlan:
    """Keep dichotomizations with a one- or two-element cell."""
    fams = {}
    for q, fam in plan.families.items():
        k = len(plan.labels[q])
        fams[q] = [A for A in fam if min(len(A), k - len(A)) <= 2]
    return SplitPlan(fams, plan.labels)


PLANS = ("full", "cuts", "allowable", "12")


def make_plan(system: System, name: str) -> SplitPlan:
    if name == "full":
        return plan_full_categorical(system)
    if name == "cuts":
        return plan_cuts(system)
    if name == "allowable":
        return plan_allowable(system)
    if name == "12":
        return reduce_12(plan_full_categorical(system))
    raise ValueError(f"unknown plan {name!r}; expected one of {PLANS}")


def determination_check(plan: SplitPlan, q, labels: Iterable | None = None) -> bool:
    """True iff the indicators of the plan's subsets tell apart every label.

    ``labels`` restricts the check to a subset of the value set.
    """
    fam = plan[q]
    pool = tuple(plan.labels[q] if labels is None else labels)
    patterns = {tuple(x in A for A in fam) for x in pool}
    return len(patterns) == len(set(pool))


@dataclass(frozen=True)
class SplitSystem:
    """Binary system with contents :class:`SplitContent`, plus its origin."""

    system: System
    source: System
    plan: SplitPlan

    @property
    def contents(self):
        return self.system.contents

    @property
    def contexts(self):
        return self.system.contexts

    def split_contents(self, q) -> tuple:
        return tuple(SplitContent(q, A) for A in self.plan[q])


def split_system(system: System, plan: SplitPlan) -> SplitSystem:
    missing = [q for q in system.contents if q not in plan]
    if missing:
        raise PlanIncomplete(f"plan lacks contents {missing!r}")
    for q in system.contents:
        if not determination_check(plan, q, _support_union(system, q)):
            raise NotDetermining(f"plan for {q!r} does not determine the value of the variable")
    contents = {SplitContent(q, A): BINARY for q in system.contents for A in plan[q]}
    contexts = []
    for ctx in system.contexts:
        measures = tuple(SplitContent(q, A) for q in ctx.measures for A in plan[q])
        sets = [set(A) for q in ctx.measures for A in plan[q]]
        owner = [ctx.position[q] for q in ctx.measures for _ in plan[q]]
        bunch: dict[tuple, Fraction] = {}
        for values, p in ctx.atoms:
            key = tuple(int(values[i] in s) for i, s in zip(owner, sets))
            bunch[key] = bunch.get(key, Fraction(0)) + p
        contexts.append(Context(ctx.id, measures, tuple(bunch.items())))
    return SplitSystem(System(contents, tuple(contexts)), system, plan)

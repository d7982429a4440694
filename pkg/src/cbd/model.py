"""Systems of random variables: contents, contexts, bunches and connections.

A system is a finite table of random variables ``R[q, c]`` indexed by a
content ``q`` (what is measured) and a context ``c`` (under which conditions).
Variables sharing a context are jointly distributed; their joint
distribution is the *bunch* of that context.  Variables sharing a content
form a *connection*; they are stochastically unrelated.

All probabilities are exact :class:`fractions.Fraction` values.
"""
from __future__ import annotations

import itertools
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from numbers import Rational as _RationalABC
from typing import Any

from .errors import (
    AlreadyMeasured,
    DuplicateAtom,
    EmptyFormat,
    NonUnitMass,
    NotMeasured,
    NotSurjective,
    UnknownContent,
    UnknownLabel,
    ValidationError,
)

Rational = Fraction

CATEGORICAL = "categorical"
ORDERED = "ordered"
KINDS = (CATEGORICAL, ORDERED)


def as_rational(value: Any) -> Fraction:
    """Convert *value* to an exact rational.

    Accepts ints, Fractions, Decimals and strings such as ``"7/10"`` or
    ``"0.25"``.  Decimal strings are converted by place value, so ``"0.1"`` is
    exactly ``1/10``.  Binary floats are rejected: their exact value is rarely
    what the user meant.
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a probability: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse probability {value!r}") from exc
    raise ValidationError(f"probabilities must be exact (int, str, Fraction), got {value!r}")


@dataclass(frozen=True)
class ValueSpace:
    """The set of values of one content, with an optional vicinity override.

    ``kind`` is ``"categorical"`` (unordered labels) or ``"ordered"`` (labels
    listed in increasing order).  When ``vicinities`` is ``None`` they are
    derived: all order-intervals for ordered spaces, all nonempty subsets for
    categorical ones.
    """

    labels: tuple
    kind: str = CATEGORICAL
    vicinities: tuple[frozenset, ...] | None = None

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValidationError("a value space needs at least one label")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate labels in {labels!r}")
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.vicinities is not None:
            vics = tuple(frozenset(v) for v in self.vicinities)
            known = set(labels)
            for v in vics:
                if not v:
                    raise ValidationError("vicinities must be nonempty")
                if not v <= known:
                    raise UnknownLabel(f"vicinity {sorted(map(str, v))} has labels outside the space")
            covered = set().union(*vics) if vics else set()
            missing = [x for x in labels if x not in covered]
            if missing:
                raise ValidationError(f"labels without a vicinity: {missing!r}")
            object.__setattr__(self, "vicinities", vics)

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self._index

    @cached_property
    def _index(self) -> dict:
        return {x: i for i, x in enumerate(self.labels)}

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(f"{label!r} is not one of {self.labels!r}") from None

    @property
    def is_binary(self) -> bool:
        return len(self.labels) == 2

    def materialized_vicinities(self) -> tuple[frozenset, ...]:
        if self.vicinities is not None:
            return self.vicinities
        k = len(self.labels)
        if self.kind == ORDERED:
            return tuple(frozenset(self.labels[i:j]) for i in range(k) for j in range(i + 1, k + 1))
        return tuple(
            frozenset(c)
            for r in range(1, k + 1)
            for c in itertools.combinations(self.labels, r)
        )


@dataclass(frozen=True)
class Context:
    """One context: the contents it measures and their joint distribution.

    ``atoms`` pairs a value tuple (one value per measured content, in the
    order of ``measures``) with its probability.  Only positive-probability
    atoms are stored.
    """

    id: Hashable
    measures: tuple
    atoms: tuple[tuple[tuple, Fraction], ...]

    @cached_property
    def bunch(self) -> dict[tuple, Fraction]:
        return dict(self.atoms)

    @cached_property
    def position(self) -> dict:
        return {q: i for i, q in enumerate(self.measures)}

    def marginal(self, contents: Sequence) -> dict[tuple, Fraction]:
        """Joint distribution of *contents* (a subsequence of ``measures``)."""
        idx = [self.position[q] for q in contents]
        out: dict[tuple, Fraction] = {}
        for values, p in self.atoms:
            key = tuple(values[i] for i in idx)
            out[key] = out.get(key, 0) + p
        return out


@dataclass
class ContextSpec:
    """Unvalidated context record (see :func:`validate_system`)."""

    id: Hashable
    measures: Sequence
    atoms: Sequence[tuple[Sequence, Any]]


@dataclass
class SystemSpec:
    """Unvalidated system description.

    ``contents`` maps content ids to :class:`ValueSpace`; ``contexts`` is a list
    of :class:`ContextSpec`.
    """

    contents: Mapping[Hashable, ValueSpace]
    contexts: Sequence[ContextSpec] = field(default_factory=list)


@dataclass(frozen=True)
class ConnectionView:
    content: Hashable
    marginals: dict  # context id -> {label: Fraction} over every label of the space

    def pmfs(self) -> list[dict]:
        return list(self.marginals.values())


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a structural check; falsy when a witness of failure exists."""

    ok: bool
    witness: Any = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class System:
    """A validated system of random variables.  Build with :func:`validate_system`
    or :func:`make_system`; every structural edit returns a new instance."""

    contents: Mapping[Hashable, ValueSpace]
    contexts: tuple[Context, ...]

    @cached_property
    def context_ids(self) -> tuple:
        return tuple(c.id for c in self.contexts)

    @cached_property
    def _context_index(self) -> dict:
        return {c.id: c for c in self.contexts}

    def context(self, cid) -> Context:
        try:
            return self._context_index[cid]
        except KeyError:
            raise ValidationError(f"unknown context {cid!r}") from None

    @cached_property
    def format(self) -> frozenset:
        """The measured-in relation as a set of ``(content, context)`` pairs."""
        return frozenset((q, c.id) for c in self.contexts for q in c.measures)

    @cached_property
    def variables(self) -> tuple:
        """All ``(content, context)`` pairs in context order, then measure order."""
        return tuple((q, c.id) for c in self.contexts for q in c.measures)

    def contexts_of(self, q) -> tuple:
        if q not in self.contents:
            raise UnknownContent(f"unknown content {q!r}")
        return tuple(c.id for c in self.contexts if q in c.position)

    def space(self, q) -> ValueSpace:
        try:
            return self.contents[q]
        except KeyError:
            raise UnknownContent(f"unknown content {q!r}") from None

    def distribution(self, q, cid) -> dict:
        """Marginal pmf of ``R[q, cid]`` over the labels that occur."""
        ctx = self.context(cid)
        if q not in ctx.position:
            raise NotMeasured(f"content {q!r} is not measured in context {cid!r}")
        return {k[0]: p for k, p in ctx.marginal([q]).items()}

    def __repr__(self):
        return f"System(contents={list(self.contents)!r}, contexts={list(self.context_ids)!r})"


def _build(contents: Mapping, contexts: Iterable[ContextSpec]) -> System:
    contents = dict(contents)
    for q, space in contents.items():
        if not isinstance(space, ValueSpace):
            raise ValidationError(f"content {q!r} needs a ValueSpace, got {type(space).__name__}")
    seen_ids = set()
    built = []
    for spec in contexts:
        cid = spec.id
        if cid in seen_ids:
            raise ValidationError(f"duplicate context id {cid!r}")
        seen_ids.add(cid)
        measures = tuple(spec.measures)
        if not measures:
            raise EmptyFormat(f"context {cid!r} measures no content")
        if len(set(measures)) != len(measures):
            raise ValidationError(f"context {cid!r} lists a content twice")
        for q in measures:
            if q not in contents:
                raise UnknownContent(f"context {cid!r} measures undeclared content {q!r}")
        spaces = [contents[q] for q in measures]
        atoms = {}
        for raw_values, raw_p in spec.atoms:
            values = tuple(raw_values)
            if len(values) != len(measures):
                raise ValidationError(
                    f"context {cid!r}: atom {values!r} has {len(values)} values, "
                    f"expected {len(measures)}"
                )
            for q, space, x in zip(measures, spaces, values):
                if x not in space:
                    raise UnknownLabel(f"context {cid!r}: {x!r} is not a value of content {q!r}")
            if values in atoms:
                raise DuplicateAtom(f"context {cid!r}: atom {values!r} listed twice")
            p = as_rational(raw_p)
            if p < 0 or p > 1:
                raise ValidationError(f"context {cid!r}: probability {p} outside [0, 1]")
            atoms[values] = p
        total = sum(atoms.values(), Fraction(0))
        if total != 1:
            raise NonUnitMass(f"context {cid!r}: bunch probabilities sum to {total}, not 1")
        built.append(Context(cid, measures, tuple((v, p) for v, p in atoms.items() if p > 0)))
    if not built:
        raise EmptyFormat("the system measures nothing")
    return System(contents, tuple(built))


def validate_system(spec: SystemSpec) -> System:
    """Check every invariant of *spec* and return the validated :class:`System`."""
    return _build(spec.contents, spec.contexts)


def make_system(contents: Mapping, contexts: Iterable) -> System:
    """Convenience constructor.

    *contexts* items are ``(id, measures, atoms)`` triples or
    :class:`ContextSpec` instances; ``atoms`` may be a mapping
    ``{values: p}`` or a sequence of ``(values, p)`` pairs.
    """
    specs = []
    for item in contexts:
        if isinstance(item, ContextSpec):
            specs.append(item)
            continue
        cid, measures, atoms = item
        if isinstance(atoms, Mapping):
            atoms = list(atoms.items())
        specs.append(ContextSpec(cid, tuple(measures), atoms))
    return _build(contents, specs)


def single_connection(pmfs: Sequence[Mapping], labels: Sequence, kind: str = CATEGORICAL,
                      content="q") -> System:
    """A system with one content measured alone in each of ``len(pmfs)`` contexts.

    Context ids are ``1..n``.
    """
    space = ValueSpace(tuple(labels), kind)
    contexts = []
    for i, pmf in enumerate(pmfs, start=1):
        if not isinstance(pmf, Mapping):
            pmf = dict(zip(labels, pmf))
        contexts.append(ContextSpec(i, (content,), [((x,), p) for x, p in pmf.items()]))
    return _build({content: space}, contexts)


def connection(system: System, q) -> ConnectionView:
    space = system.space(q)
    marginals = {}
    for cid in system.contexts_of(q):
        dist = system.distribution(q, cid)
        marginals[cid] = {x: dist.get(x, Fraction(0)) for x in space.labels}
    return ConnectionView(q, marginals)


def is_consistently_connected(system: System) -> CheckResult:
    """Consistent iff every connection has identically distributed members.

    The witness is a ``(content, context, context)`` triple.
    """
    for q in system.contents:
        view = connection(system, q)
        items = list(view.marginals.items())
        for (c1, m1), (c2, m2) in zip(items, items[1:]):
            if m1 != m2:
                return CheckResult(False, (q, c1, c2))
    return CheckResult(True)


def is_strongly_consistent(system: System) -> CheckResult:
    """Strong iff any two contexts agree on the joint of their shared contents."""
    ctxs = system.contexts
    for a, b in itertools.combinations(ctxs, 2):
        shared = [q for q in a.measures if q in b.position]
        if shared and a.marginal(shared) != b.marginal(shared):
            return CheckResult(False, (a.id, b.id))
    return CheckResult(True)


def _specs(system: System) -> list[ContextSpec]:
    return [ContextSpec(c.id, c.measures, list(c.atoms)) for c in system.contexts]


def coarse_grain(system: System, maps: Mapping, targets: Mapping | None = None) -> System:
    """Apply a per-content map of labels to every variable of that content.

    ``maps[q]`` is a mapping from every label of ``E_q`` onto a target label.
    ``targets[q]`` optionally fixes the target :class:`ValueSpace`; by default
    its labels are the images in first-appearance order, ordered when the
    source is ordered and the map is monotone, categorical otherwise.
    Colliding atoms have their probabilities summed.
    """
    targets = dict(targets or {})
    new_contents = dict(system.contents)
    funcs = {}
    for q, mapping in maps.items():
        src = system.space(q)
        mapping = dict(mapping)
        for x in src.labels:
            if x not in mapping:
                raise UnknownLabel(f"map for content {q!r} is not defined at {x!r}")
        extra = set(mapping) - set(src.labels)
        if extra:
            raise UnknownLabel(f"map for content {q!r} has labels outside the space: {sorted(map(str, extra))}")
        image = list(dict.fromkeys(mapping[x] for x in src.labels))
        if q in targets:
            dst = targets[q]
            for y in image:
                if y not in dst:
                    raise UnknownLabel(f"map for content {q!r} hits {y!r}, not a target label")
            if set(image) != set(dst.labels):
                raise NotSurjective(f"map for content {q!r} misses target labels")
        else:
            kind = CATEGORICAL
            if src.kind == ORDERED:
                ranks = [image.index(mapping[x]) for x in src.labels]
                if ranks == sorted(ranks):
                    kind = ORDERED
            dst = ValueSpace(tuple(image), kind)
        new_contents[q] = dst
        funcs[q] = mapping
    specs = []
    for c in system.contexts:
        fs = [funcs.get(q) for q in c.measures]
        acc: dict[tuple, Fraction] = {}
        for values, p in c.atoms:
            key = tuple(x if f is None else f[x] for f, x in zip(fs, values))
            acc[key] = acc.get(key, 0) + p
        specs.append(ContextSpec(c.id, c.measures, list(acc.items())))
    return _build(new_contents, specs)


def subsystem(system: System, keep: Iterable) -> System:
    """Restrict to the variables in *keep* (a set of ``(content, context)`` pairs).

    Contexts left with no variables are removed; bunches are marginalized.
    """
    keep = set(keep)
    if not keep:
        raise EmptyFormat("a subsystem needs at least one variable")
    bad = keep - system.format
    if bad:
        raise NotMeasured(f"not in the system: {sorted(map(str, bad))}")
    specs = []
    for c in system.contexts:
        kept = [q for q in c.measures if (q, c.id) in keep]
        if kept:
            specs.append(ContextSpec(c.id, tuple(kept), list(c.marginal(kept).items())))
    return _build(system.contents, specs)


def drop_variable(system: System, q, c) -> System:
    if (q, c) not in system.format:
        raise NotMeasured(f"content {q!r} is not measured in context {c!r}")
    return subsystem(system, system.format - {(q, c)})


def add_deterministic(system: System, q, c, value) -> System:
    """Add ``R[q, c] = value`` with probability one.  A new context is created
    if *c* does not exist yet."""
    space = system.space(q)
    if (q, c) in system.format:
        raise AlreadyMeasured(f"content {q!r} is already measured in context {c!r}")
    if value not in space:
        raise UnknownLabel(f"{value!r} is not a value of content {q!r}")
    specs = _specs(system)
    for spec in specs:
        if spec.id == c:
            spec.measures = tuple(spec.measures) + (q,)
            spec.atoms = [(tuple(v) + (value,), p) for v, p in spec.atoms]
            break
    else:
        specs.append(ContextSpec(c, (q,), [((value,), Fraction(1))]))
    return _build(system.contents, specs)


def is_deterministic(system: System, q, c) -> bool:
    return len(system.distribution(q, c)) == 1

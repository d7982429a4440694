"""Finite symmetric Fréchet V-spaces, V-linked sets and allowable coarse-grainings.

A V-space is a finite ground set with a family of nonempty subsets called
vicinities; every point lies in at least one vicinity.  A point ``x`` is a
limit point of ``F`` when every vicinity of ``x`` meets ``F - {x}``.  The
V-linked sets are the least family that contains the singletons and the
vicinities and is closed under

* adding limit points of a member to that member, and
* uniting members that share a point.

Sets are handled as bitmasks over the ground order internally.
"""
from __future__ import annotations

import warnings
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property, lru_cache

from . import _kernels
from .errors import GroundNotLinked, NotSurjective, UnknownLabel
from .model import ORDERED, ValueSpace

# Above this size the power-set closure is not enumerated.
MAX_ENUMERATED = 16


class NotOrdinaryWarning(UserWarning):
    """The vicinities do not generate the full power set."""


@dataclass(frozen=True)
class VSpace:
    ground: tuple
    vicinities: tuple[frozenset, ...]

    def __post_init__(self):
        ground = tuple(self.ground)
        if not ground:
            raise ValueError("a V-space needs a nonempty ground set")
        if len(set(ground)) != len(ground):
            raise ValueError("duplicate points in the ground set")
        vics = tuple(dict.fromkeys(frozenset(v) for v in self.vicinities))
        pts = set(ground)
        for v in vics:
            if not v:
                raise ValueError("vicinities must be nonempty")
            if not v <= pts:
                raise UnknownLabel(f"vicinity {sorted(map(str, v))} leaves the ground set")
        covered = set().union(*vics)
        missing = [x for x in ground if x not in covered]
        if missing:
            raise ValueError(f"every point needs a vicinity; missing {missing!r}")
        object.__setattr__(self, "ground", ground)
        object.__setattr__(self, "vicinities", vics)

    @classmethod
    def ordered(cls, labels: Iterable) -> VSpace:
        return cls.from_value_space(ValueSpace(tuple(labels), ORDERED))

    @classmethod
    def categorical(cls, labels: Iterable) -> VSpace:
        return cls.from_value_space(ValueSpace(tuple(labels)))

    @classmethod
    def from_value_space(cls, space: ValueSpace) -> VSpace:
        return cls(space.labels, space.materialized_vicinities())

    @classmethod
    def from_graph(cls, labels: Iterable, edges: Iterable) -> VSpace:
        """Vicinities are the edges ``{x, y}``; isolated points get ``{x}``."""
        labels = tuple(labels)
        vics = [frozenset(e) for e in edges]
        covered = set().union(*vics) if vics else set()
        vics += [frozenset([x]) for x in labels if x not in covered]
        return cls(labels, vics)

    def __len__(self):
        return len(self.ground)

    @cached_property
    def _pos(self) -> dict:
        return {x: i for i, x in enumerate(self.ground)}

    @property
    def full_mask(self) -> int:
        return (1 << len(self.ground)) - 1

    def mask(self, subset: Iterable) -> int:
        out = 0
        for x in subset:
            try:
                out |= 1 << self._pos[x]
            except KeyError:
                raise UnknownLabel(f"{x!r} is not a point of the space") from None
        return out

    def subset(self, mask: int) -> frozenset:
        return frozenset(x for i, x in enumerate(self.ground) if mask >> i & 1)

    def ordered_subset(self, mask: int) -> tuple:
        return tuple(x for i, x in enumerate(self.ground) if mask >> i & 1)

    @cached_property
    def vicinity_masks(self) -> tuple[int, ...]:
        return tuple(self.mask(v) for v in self.vicinities)

    @cached_property
    def _vics_by_point(self) -> tuple[tuple[int, ...], ...]:
        ordered = sorted(self.vicinity_masks, key=lambda v: (bin(v).count("1"), v))
        return tuple(tuple(v for v in ordered if v >> i & 1) for i in range(len(self.ground)))


@dataclass(frozen=True)
class Dichotomy:
    """A two-cell partition; ``part0`` holds the least point in ground order."""

    part0: frozenset
    part1: frozenset

    @classmethod
    def of(cls, space: VSpace, cell: Iterable) -> Dichotomy:
        m = space.mask(cell)
        if m == 0 or m == space.full_mask:
            raise ValueError("both cells of a dichotomy must be nonempty")
        if not m & 1:
            m ^= space.full_mask
        return cls(space.subset(m), space.subset(m ^ space.full_mask))

    def cells(self) -> frozenset:
        return frozenset((self.part0, self.part1))


def _limit_mask(space: VSpace, F: int) -> int:
    out = 0
    for i, vics in enumerate(space._vics_by_point):
        bit = 1 << i
        if all(v & F & ~bit for v in vics):
            out |= bit
    return out


def limit_points(space: VSpace, F: Iterable) -> frozenset:
    """Points every vicinity of which meets ``F`` outside the point itself."""
    return space.subset(_limit_mask(space, space.mask(F)))


@lru_cache(maxsize=256)
def _closure(n: int, vic_masks: tuple[int, ...]) -> frozenset:
    return frozenset(_kernels.active.linked_closure(n, vic_masks))


@dataclass(frozen=True)
class LinkedFamily:
    space: VSpace
    masks: frozenset

    def __contains__(self, subset) -> bool:
        return self.space.mask(subset) in self.masks

    def __len__(self):
        return len(self.masks)

    def __iter__(self):
        for m in sorted(self.masks, key=lambda m: (bin(m).count("1"), m)):
            yield self.space.subset(m)


def vlinked_family(space: VSpace) -> LinkedFamily:
    """Every V-linked subset of *space* (at most 16 points)."""
    n = len(space.ground)
    if n > MAX_ENUMERATED:
        raise ValueError(f"family enumeration is capped at {MAX_ENUMERATED} points; use is_vlinked")
    return LinkedFamily(space, _closure(n, tuple(sorted(space.vicinity_masks))))


def _linked_on_demand(space: VSpace, target: int) -> bool:
    """Decide linkedness of one set by searching decompositions below it."""
    vics = set(space.vicinity_masks)
    memo: dict[int, bool] = {}

    def linked(F: int) -> bool:
        if F in memo:
            return memo[F]
        memo[F] = False  # guards cycles; recomputed below
        ok = F & (F - 1) == 0 or F in vics
        if not ok:
            # rule (ii): F = G + {x} with x a limit point of G
            bits = [1 << i for i in range(len(space.ground)) if F >> i & 1]
            for b in bits:
                G = F ^ b
                if _limit_mask(space, G) & b and linked(G):
                    ok = True
                    break
        if not ok:
            # rule (iii): F = G | H, G & H nonempty, both proper and linked
            sub = (F - 1) & F
            while sub and not ok:
                if linked(sub):
                    rest = F & ~sub
                    # H must cover rest and meet sub
                    extra = sub
                    e = extra
                    while True:
                        H = rest | e
                        if e and H != F and linked(H):
                            ok = True
                            break
                        if e == 0:
                            break
                        e = (e - 1) & extra
                sub = (sub - 1) & F
        memo[F] = ok
        return ok

    return linked(target)


def is_vlinked(space: VSpace, F: Iterable) -> bool:
    m = space.mask(F)
    if m == 0:
        return False
    if len(space.ground) <= MAX_ENUMERATED:
        return m in vlinked_family(space).masks
    return _linked_on_demand(space, m)


def is_ordinary(space: VSpace) -> bool:
    """True when the vicinities generate the power set (they separate points)."""
    patterns = {}
    for i in range(len(space.ground)):
        key = tuple(v >> i & 1 for v in space.vicinity_masks)
        if key in patterns:
            return False
        patterns[key] = i
    return True


def allowable_dichotomizations(space: VSpace) -> list[Dichotomy]:
    """Dichotomies whose two cells (and the ground set) are V-linked.

    Sorted by the size of ``part0`` and then by ground order.
    """
    if not is_ordinary(space):
        warnings.warn("vicinities do not generate the power set", NotOrdinaryWarning, stacklevel=2)
    n = len(space.ground)
    full = space.full_mask
    if n <= MAX_ENUMERATED:
        fam = vlinked_family(space).masks
        linked = fam.__contains__
    else:
        def linked(m):
            return _linked_on_demand(space, m)
    if not linked(full):
        raise GroundNotLinked("the ground set is not V-linked; no dichotomization is allowable")
    out = []
    for m in range(1, full, 2):  # part0 always holds point 0
        if linked(m) and linked(full ^ m):
            out.append(m)
    out.sort(key=lambda m: (bin(m).count("1"), [i for i in range(n) if m >> i & 1]))
    return [Dichotomy(space.subset(m), space.subset(full ^ m)) for m in out]


def _image(f: Mapping, src: VSpace, dst: VSpace, m: int) -> int:
    return dst.mask(f[x] for x in src.ordered_subset(m))


def _preimage(f: Mapping, src: VSpace, dst: VSpace, m: int) -> int:
    target = dst.subset(m)
    return src.mask(x for x in src.ground if f[x] in target)


def is_allowable_coarse_graining(src: VSpace, dst: VSpace, f: Mapping) -> bool:
    """Images of linked sets are linked and preimages of linked sets are linked."""
    for x in src.ground:
        if x not in f:
            raise UnknownLabel(f"map is not defined at {x!r}")
    image = {f[x] for x in src.ground}
    for y in image:
        if y not in dst._pos:
            raise UnknownLabel(f"map hits {y!r}, not a point of the target")
    if image != set(dst.ground):
        raise NotSurjective("a coarse-graining must be onto the target space")
    src_fam = vlinked_family(src).masks
    dst_fam = vlinked_family(dst).masks
    return all(_image(f, src, dst, m) in dst_fam for m in src_fam) and all(
        _preimage(f, src, dst, m) in src_fam for m in dst_fam
    )


def compose(f: Mapping, g: Mapping) -> dict:
    return {x: g[y] for x, y in f.items()}


def compose_check(src: VSpace, mid: VSpace, dst: VSpace, f: Mapping, g: Mapping) -> bool:
    """Check that ``g o f`` is allowable given allowable ``f`` and ``g``."""
    if not (is_allowable_coarse_graining(src, mid, f) and is_allowable_coarse_graining(mid, dst, g)):
        raise ValueError("compose_check needs two allowable coarse-grainings")
    return is_allowable_coarse_graining(src, dst, compose(f, g))


DICHOTOMY_SPACE = VSpace((0, 1), (frozenset([0]), frozenset([1]), frozenset([0, 1])))


def cross_space() -> VSpace:
    """Five positions (left, center, right, up, down); vicinities join neighbours."""
    labels = ("left", "center", "right", "up", "down")
    edges = [
        ("left", "up"), ("left", "center"), ("left", "down"),
        ("right", "up"), ("right", "center"), ("right", "down"),
        ("up", "center"), ("down", "center"),
    ]
    return VSpace.from_graph(labels, edges)

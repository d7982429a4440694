"""Couplings: construction and multimaximality checks.

A coupling is stored as a list of positive-probability atoms; each atom
assigns one value to every variable.  Binary variables take values 0 and 1.
"""
from __future__ import annotations

import bisect
import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import NotACoupling, NotAligned, OutOfRange
from .model import CheckResult, as_rational


@dataclass(frozen=True)
class Coupling:
    """Joint distribution of ``variables`` given by ``atoms``.

    ``atoms`` is a tuple of ``(values, probability)`` pairs with ``values``
    aligned to ``variables``.  Equal value tuples are merged, zero atoms are
    dropped, and the total must be exactly 1.
    """

    variables: tuple
    atoms: tuple

    def __post_init__(self):
        variables = tuple(self.variables)
        merged: dict[tuple, Fraction] = {}
        for values, p in self.atoms:
            values = tuple(values)
            if len(values) != len(variables):
                raise NotACoupling(f"atom {values!r} has {len(values)} values for {len(variables)} variables")
            p = as_rational(p)
            if p < 0:
                raise NotACoupling(f"negative probability {p} at {values!r}")
            merged[values] = merged.get(values, Fraction(0)) + p
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise NotACoupling(f"atoms sum to {total}, not 1")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "atoms", tuple((v, p) for v, p in merged.items() if p > 0))

    @classmethod
    def from_columns(cls, rows: Sequence[Sequence], probs: Sequence, variables=None) -> Coupling:
        """Build from a table whose rows are variables and columns are atoms."""
        cols = list(zip(*rows))
        if len(cols) != len(probs):
            raise NotACoupling("one probability per column is required")
        variables = tuple(range(len(rows))) if variables is None else tuple(variables)
        return cls(variables, tuple(zip(cols, probs)))

    def __len__(self):
        return len(self.atoms)

    @cached_property
    def _index(self) -> dict:
        return {v: i for i, v in enumerate(self.variables)}

    def index(self, var) -> int:
        try:
            return self._index[var]
        except KeyError:
            raise KeyError(f"unknown variable {var!r}") from None

    def marginal(self, var) -> dict:
        i = self.index(var)
        out: dict = {}
        for values, p in self.atoms:
            out[values[i]] = out.get(values[i], Fraction(0)) + p
        return out

    def joint(self, *variables) -> dict:
        idx = [self.index(v) for v in variables]
        out: dict = {}
        for values, p in self.atoms:
            key = tuple(values[i] for i in idx)
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def restrict(self, variables: Iterable) -> Coupling:
        variables = tuple(variables)
        return Coupling(variables, tuple(self.joint(*variables).items()))

    def map_values(self, fns: Mapping) -> Coupling:
        """Apply ``fns[var]`` to each listed variable (others unchanged)."""
        idx = {self.index(v): f for v, f in fns.items()}
        atoms = []
        for values, p in self.atoms:
            atoms.append((tuple(idx[i](x) if i in idx else x for i, x in enumerate(values)), p))
        return Coupling(self.variables, tuple(atoms))

    def is_coupling_of(self, marginals: Mapping) -> bool:
        """True iff every listed variable has the given pmf (zero entries ignored)."""
        for var, pmf in marginals.items():
            want = {x: Fraction(p) for x, p in pmf.items() if p}
            if self.marginal(var) != want:
                return False
        return True


# binary families

def _check_ps(ps: Sequence) -> list[Fraction]:
    out = []
    for p in ps:
        p = as_rational(p)
        if not 0 <= p <= 1:
            raise OutOfRange(f"probability {p} is outside [0, 1]")
        out.append(p)
    return out


def multimaximal_binary(ps: Sequence, variables: Sequence | None = None) -> Coupling:
    """The unique multimaximal coupling of binary variables with ``Pr[Y_i = 1] = ps[i]``.

    Sorting by decreasing ``p`` (ties by index) gives the staircase atoms
    ``0...0, 10...0, ..., 1...1`` with telescoped probabilities.
    """
    ps = _check_ps(ps)
    n = len(ps)
    variables = tuple(range(n)) if variables is None else tuple(variables)
    order = sorted(range(n), key=lambda i: (-ps[i], i))
    sorted_ps = [Fraction(1)] + [ps[i] for i in order] + [Fraction(0)]
    atoms = []
    for t in range(n + 1):
        values = [0] * n
        for i in order[:t]:
            values[i] = 1
        atoms.append((tuple(values), sorted_ps[t] - sorted_ps[t + 1]))
    return Coupling(variables, tuple(atoms))


def check_multimaximal_binary(c: Coupling, ps: Sequence | None = None) -> CheckResult:
    """Pairwise test ``Pr[Y_i = 1, Y_j = 1] = min(p_i, p_j)``.

    The witness is the first failing pair of positions ``(i, j)``; with *ps*
    given, a marginal mismatch is reported as ``("marginal", i)``.
    """
    n = len(c.variables)
    ones = [Fraction(0)] * n
    both = [[Fraction(0)] * n for _ in range(n)]
    for values, p in c.atoms:
        if any(v not in (0, 1) for v in values):
            raise ValueError("check_multimaximal_binary needs 0/1 values")
        on = [i for i, v in enumerate(values) if v == 1]
        for i in on:
            ones[i] += p
        for i, j in itertools.combinations(on, 2):
            both[i][j] += p
    if ps is not None:
        ps = _check_ps(ps)
        for i, (a, b) in enumerate(zip(ones, ps)):
            if a != b:
                return CheckResult(False, ("marginal", i))
    for i, j in itertools.combinations(range(n), 2):
        if both[i][j] != min(ones[i], ones[j]):
            return CheckResult(False, (i, j))
    return CheckResult(True)


# ordered connections

@dataclass(frozen=True)
class CdfTable:
    """Distribution function of a finitely supported variable.

    ``points`` lists the support in increasing order and ``cumulative`` the
    values ``F(x)`` there.  ``order`` is the full ordered label set used to
    compare labels; it defaults to ``points``.
    """

    points: tuple
    cumulative: tuple
    order: tuple | None = None

    def __post_init__(self):
        points = tuple(self.points)
        cum = tuple(as_rational(v) for v in self.cumulative)
        order = points if self.order is None else tuple(self.order)
        if len(points) != len(cum) or not points:
            raise ValueError("points and cumulative values must be nonempty and aligned")
        rank = {x: i for i, x in enumerate(order)}
        missing = [x for x in points if x not in rank]
        if missing:
            raise ValueError(f"points {missing!r} are missing from the order")
        ranks = [rank[x] for x in points]
        if ranks != sorted(ranks) or len(set(ranks)) != len(ranks):
            raise ValueError("points must be strictly increasing")
        if any(a >= b for a, b in zip(cum, cum[1:])) or cum[0] <= 0:
            raise ValueError("cumulative values must be positive and strictly increasing")
        if cum[-1] != 1:
            raise ValueError(f"final cumulative value is {cum[-1]}, not 1")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "cumulative", cum)
        object.__setattr__(self, "order", order)

    @classmethod
    def from_pmf(cls, pmf: Mapping, order: Sequence | None = None) -> CdfTable:
        order = tuple(sorted(pmf)) if order is None else tuple(order)
        points, cum, acc = [], [], Fraction(0)
        for x in order:
            p = as_rational(pmf.get(x, 0))
            if p > 0:
                acc += p
                points.append(x)
                cum.append(acc)
        return cls(tuple(points), tuple(cum), order)

    @cached_property
    def _rank(self) -> dict:
        return {x: i for i, x in enumerate(self.order)}

    def rank(self, x) -> int:
        return self._rank[x]

    def __call__(self, x) -> Fraction:
        """``F(x) = Pr[X <= x]`` for a label ``x`` of the order."""
        r = self._rank[x]
        k = bisect.bisect_right([self._rank[p] for p in self.points], r)
        return self.cumulative[k - 1] if k else Fraction(0)

    def quantile(self, u) -> object:
        """``min{x : F(x) >= u}`` for ``0 < u <= 1``."""
        u = as_rational(u)
        if not 0 < u <= 1:
            raise OutOfRange(f"quantile level {u} is outside (0, 1]")
        return self.points[bisect.bisect_left(self.cumulative, u)]

    def pmf(self) -> dict:
        prev = Fraction(0)
        out = {}
        for x, c in zip(self.points, self.cumulative):
            out[x] = c - prev
            prev = c
        return out


def quantile_coupling(cdfs: Sequence[CdfTable], variables: Sequence | None = None) -> Coupling:
    """Comonotone coupling ``S^k = F_k^{-1}(U)`` with ``U`` uniform on ``(0, 1]``."""
    cdfs = list(cdfs)
    variables = tuple(range(len(cdfs))) if variables is None else tuple(variables)
    breaks = sorted({c for F in cdfs for c in F.cumulative})
    atoms = []
    prev = Fraction(0)
    for b in breaks:
        atoms.append((tuple(F.quantile(b) for F in cdfs), b - prev))
        prev = b
    return Coupling(variables, tuple(atoms))


def forbidden_region_check(Fi: CdfTable, Fj: CdfTable, joint: Coupling | Mapping) -> CheckResult:
    """Test that the joint law of a pair puts no mass on the forbidden set ``K``.

    ``K`` is the union over cut points ``x`` of the quadrant(s) that would make
    the dichotomized pair ``([S^i <= x], [S^j <= x])`` non-maximal.  At finite
    support only the support points need to be scanned.  The witness is the
    offending atom ``(u, v)``.
    """
    if isinstance(joint, Coupling):
        if len(joint.variables) != 2:
            raise NotACoupling("the joint must couple exactly two variables")
        atoms = dict(joint.atoms)
    else:
        atoms = {tuple(k): as_rational(p) for k, p in joint.items() if as_rational(p) != 0}
    mi: dict = {}
    mj: dict = {}
    for (u, v), p in atoms.items():
        mi[u] = mi.get(u, Fraction(0)) + p
        mj[v] = mj.get(v, Fraction(0)) + p
    if mi != Fi.pmf() or mj != Fj.pmf():
        raise NotACoupling("the joint does not have the given marginals")
    order = Fi.order if len(Fi.order) >= len(Fj.order) else Fj.order
    rank = {x: i for i, x in enumerate(order)}
    cuts = sorted({*Fi.points, *Fj.points}, key=rank.__getitem__)
    signs = [(rank[x], (Fi(x) > Fj(x)) - (Fi(x) < Fj(x))) for x in cuts]
    for (u, v), p in sorted(atoms.items(), key=lambda a: (rank[a[0][0]], rank[a[0][1]])):
        ru, rv = rank[u], rank[v]
        for rx, s in signs:
            low_high = ru <= rx < rv  # (-inf, x] x (x, inf)
            high_low = rv <= rx < ru  # (x, inf) x (-inf, x]
            if (s <= 0 and low_high) or (s >= 0 and high_low):
                return CheckResult(False, (u, v))
    return CheckResult(True)


def dichotomize(c: Coupling, subsets: Mapping) -> Coupling:
    """Binary coupling of ``[S^v in A]`` over the pairs ``(v, A)`` in *subsets*.

    *subsets* maps each variable to an iterable of subsets.
    """
    spec = [(v, tuple(A)) for v, fam in subsets.items() for A in fam]
    idx = [(c.index(v), frozenset(A)) for v, A in spec]
    atoms = []
    for values, p in c.atoms:
        atoms.append((tuple(int(values[i] in A) for i, A in idx), p))
    return Coupling(tuple(spec), tuple(atoms))


def cut_splits(c: Coupling, order: Sequence) -> Coupling:
    """Dichotomize every variable at every cut ``{y <= x}``, ``x`` below the top of *order*."""
    order = tuple(order)
    cuts = [order[: k + 1] for k in range(len(order) - 1)]
    return dichotomize(c, {v: cuts for v in c.variables})


# categorical connections

def check_categorical_splits_multimax(c: Coupling) -> CheckResult:
    """Scan for ``i, i', l, l'`` with ``x != y != w != z != x``.

    ``x = S^i(l)``, ``y = S^i(l')``, ``w = S^{i'}(l')``, ``z = S^{i'}(l)``.
    No such pattern means every dichotomization of the coupling is a
    multimaximal binary family.  The witness is ``(i, i', l, l')`` with
    ``l, l'`` the offending value tuples.
    """
    n = len(c.variables)
    support = [v for v, _ in c.atoms]
    for i, ii in itertools.permutations(range(n), 2):
        pairs = {(v[i], v[ii]) for v in support}
        for (x, z), (y, w) in itertools.permutations(pairs, 2):
            if x != y and y != w and w != z and z != x:
                l = next(v for v in support if (v[i], v[ii]) == (x, z))
                ll = next(v for v in support if (v[i], v[ii]) == (y, w))
                return CheckResult(False, (c.variables[i], c.variables[ii], l, ll))
    return CheckResult(True)


def _aligned_for(pmfs: Sequence[Mapping], labels: Sequence, exceptional) -> bool:
    for x in labels:
        if x == exceptional:
            continue
        col = [Fraction(p.get(x, 0)) for p in pmfs]
        if any(a > b for a, b in zip(col, col[1:])):
            return False
    return True


def nested_events_coupling(pmfs: Sequence[Mapping], labels: Sequence, exceptional=None,
                           variables: Sequence | None = None) -> Coupling:
    """Coupling in which the events ``S^1 = i, ..., S^n = i`` increase for every
    non-exceptional value ``i``.

    The pmfs must already be in aligned order: nondecreasing at every label
    except *exceptional*.  With ``exceptional=None`` the first label that works
    is used.
    """
    labels = tuple(labels)
    pmfs = [{x: as_rational(p.get(x, 0)) for x in labels} for p in pmfs]
    n = len(pmfs)
    variables = tuple(range(n)) if variables is None else tuple(variables)
    if exceptional is None:
        exceptional = next((e for e in labels if _aligned_for(pmfs, labels, e)), None)
        if exceptional is None:
            raise NotAligned("the pmfs are not dominance-aligned in the given order")
    elif exceptional not in labels:
        raise NotAligned(f"exceptional value {exceptional!r} is not a label")
    elif not _aligned_for(pmfs, labels, exceptional):
        raise NotAligned(f"the pmfs are not aligned with exceptional value {exceptional!r}")
    atoms = []
    used = Fraction(0)
    for x in labels:
        if x == exceptional:
            continue
        levels = sorted({Fraction(0)} | {p[x] for p in pmfs})
        for a, b in zip(levels, levels[1:]):
            values = tuple(x if p[x] >= b else exceptional for p in pmfs)
            atoms.append((values, b - a))
        used += levels[-1]
    if used < 1:
        atoms.append(((exceptional,) * n, 1 - used))
    return Coupling(variables, tuple(atoms))

"""Minimal closed sets of a unary implication base satisfying a monotone
system of transversal inequalities, enumerated incrementally by joint
generation against the dual family.

Attribute sets are bitsets over attribute ids (the position of the attribute
in ``ImplicationBase.attributes``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .engine import check_dual
from .errors import BudgetViolation, DimensionError, PreconditionError
from .poset import DualInstance, Poset, bits, to_mask


@dataclass(frozen=True)
class ImplicationBase:
    """Rules ``premise -> conclusion`` over named attributes.

    Premises are attribute bitsets.  Rules with the same conclusion must not
    have comparable premises.
    """

    attributes: tuple[str, ...]
    rules: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "rules", tuple(self.rules))
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("attribute names must be unique")
        n = len(self.attributes)
        by_conclusion: dict[int, list[int]] = {}
        for premise, b in self.rules:
            if premise >> n or not 0 <= b < n:
                raise IndexError("rule refers to an unknown attribute")
            for other in by_conclusion.get(b, ()):
                if other & ~premise == 0 or premise & ~other == 0:
                    raise ValueError(
                        f"redundant rules for {self.attributes[b]!r}: "
                        "one premise contains another")
            by_conclusion.setdefault(b, []).append(premise)

    @classmethod
    def from_names(cls, attributes: Sequence[str],
                   rules: Iterable[tuple[Iterable[str], str]]) -> "ImplicationBase":
        index = {a: i for i, a in enumerate(attributes)}
        encoded = [(to_mask(index[a] for a in premise), index[b])
                   for premise, b in rules]
        return cls(tuple(attributes), tuple(encoded))

    @property
    def n(self) -> int:
        return len(self.attributes)

    @property
    def dimension(self) -> int:
        return max((p.bit_count() for p, _ in self.rules), default=0)

    def mask(self, names: Iterable[str]) -> int:
        index = {a: i for i, a in enumerate(self.attributes)}
        return to_mask(index[a] for a in names)

    def names(self, X: int) -> list[str]:
        return [self.attributes[i] for i in bits(X)]


def is_closed(base: ImplicationBase, X: int) -> bool:
    return all(not (premise & ~X == 0) or X >> b & 1 for premise, b in base.rules)


def support(rows: Sequence[int], X: int) -> int:
    """Number of rows containing every attribute of ``X``."""
    return sum(1 for row in rows if X & ~row == 0)


class ClosureLattice:
    """Closed sets of a unary base as ideals of a poset of attribute groups.

    Mutually implying attributes are merged into one group; group ids follow
    the smallest attribute id they contain.
    """

    def __init__(self, base: ImplicationBase):
        if base.dimension >= 2:
            raise DimensionError(
                "premises with two or more attributes are not supported: "
                "minimal infrequent closed sets of such bases cannot be "
                "enumerated in output polynomial time unless P=NP")
        n = base.n
        reach = [1 << a for a in range(n)]  # reach[a]: attributes forced by a
        for premise, b in base.rules:
            if premise == 0:
                raise PreconditionError(
                    f"empty premise for {base.attributes[b]!r} is not supported")
            a = premise.bit_length() - 1
            reach[a] |= 1 << b
        for k in range(n):
            kbit = 1 << k
            for i in range(n):
                if reach[i] & kbit:
                    reach[i] |= reach[k]
        group_of = [-1] * n
        groups: list[int] = []
        for a in range(n):
            if group_of[a] != -1:
                continue
            members = to_mask(b for b in bits(reach[a]) if reach[b] >> a & 1)
            for b in bits(members):
                group_of[b] = len(groups)
            groups.append(members)
        edges = set()
        for a in range(n):
            for b in bits(reach[a]):
                if group_of[a] != group_of[b]:
                    edges.add((group_of[b], group_of[a]))
        names = ["+".join(base.attributes[a] for a in bits(g)) for g in groups]
        self.base = base
        self.groups = tuple(groups)
        self.group_of = tuple(group_of)
        self.poset = Poset.from_edges(len(groups), sorted(edges), names)
        self.full = (1 << n) - 1
        # attribute-level principal down/up sets per group
        self.group_down = tuple(self.expand(d) for d in self.poset.down)
        self.group_up = tuple(self.expand(u) for u in self.poset.up)

    @property
    def n(self) -> int:
        return self.base.n

    def expand(self, G: int) -> int:
        """Attribute bitset of a group bitset."""
        out = 0
        for g in bits(G):
            out |= self.groups[g]
        return out

    def contract(self, X: int) -> int:
        """Group bitset of a closed attribute bitset."""
        return to_mask({self.group_of[a] for a in bits(X)})

    def is_closed(self, X: int) -> bool:
        return is_closed(self.base, X)

    def closed_sets(self) -> Iterator[int]:
        from .poset import enumerate_ideals
        for G in enumerate_ideals(self.poset):
            yield self.expand(G)

    def names(self, X: int) -> list[str]:
        return self.base.names(X)


def poset_from_unary_base(base: ImplicationBase) -> ClosureLattice:
    return ClosureLattice(base)


@dataclass(frozen=True)
class TransversalInequality:
    """``sum of w(H) over hyperedges H meeting X  >=  threshold``."""

    hyperedges: tuple[int, ...]
    weights: tuple[float, ...]
    threshold: float

    def __post_init__(self):
        object.__setattr__(self, "hyperedges", tuple(self.hyperedges))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.hyperedges) != len(self.weights):
            raise ValueError("one weight per hyperedge")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")

    def value(self, X: int) -> float:
        return sum(w for H, w in zip(self.hyperedges, self.weights) if H & X)

    def __call__(self, X: int) -> bool:
        return self.value(X) >= self.threshold


def transversal_eval(f: TransversalInequality, X: int) -> float:
    return f.value(X)


@dataclass(frozen=True)
class MonotoneProperty:
    """Conjunction of transversal inequalities."""

    inequalities: tuple[TransversalInequality, ...]

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))

    def __call__(self, X: int) -> bool:
        return all(f(X) for f in self.inequalities)

    @property
    def hyperedge_count(self) -> int:
        return sum(len(f.hyperedges) for f in self.inequalities)


def pi_eval(pi: MonotoneProperty, X: int) -> bool:
    return pi(X)


def property_infrequent(rows: Sequence[int], t: int, n: int) -> MonotoneProperty:
    """``support(X) <= t`` as one inequality over row complements."""
    full = (1 << n) - 1
    f = TransversalInequality(tuple(full & ~r for r in rows), (1,) * len(rows),
                              max(0, len(rows) - t))
    return MonotoneProperty((f,))


def property_row_cover(rows: Sequence[int], t: int) -> MonotoneProperty:
    """At least ``t`` rows share an attribute with ``X``."""
    f = TransversalInequality(tuple(rows), (1,) * len(rows), t)
    return MonotoneProperty((f,))


def property_linear(weights: Sequence[Sequence[float]],
                    thresholds: Sequence[float]) -> MonotoneProperty:
    """``sum of w_i(x) over x in X >= t_i`` for each i, via singleton hyperedges."""
    if len(weights) != len(thresholds):
        raise ValueError("one threshold per weight function")
    ineqs = []
    for w, t in zip(weights, thresholds):
        ineqs.append(TransversalInequality(
            tuple(1 << a for a in range(len(w))), tuple(w), t))
    return MonotoneProperty(tuple(ineqs))


def _group_order(lat: ClosureLattice, X: int) -> list[int]:
    return sorted({lat.group_of[a] for a in bits(X)})


def min_pi(lat: ClosureLattice, pi: Callable[[int], bool], X: int,
           check: bool = False) -> int:
    """Shrink closed ``X`` with ``pi(X)`` true to a minimal such closed set.

    One pass over the groups of ``X`` in ascending id order drops each
    principal up-set whose removal keeps ``pi`` true.
    """
    if not pi(X):
        raise PreconditionError("min_pi needs a set satisfying the property")
    cur = X
    for g in _group_order(lat, X):
        if not cur & lat.groups[g]:
            continue
        cand = cur & ~lat.group_up[g]
        if pi(cand):
            cur = cand
    if check:
        for g in _group_order(lat, cur):
            assert not pi(cur & ~lat.group_up[g]), "min_pi result is not minimal"
    return cur


def max_pi(lat: ClosureLattice, pi: Callable[[int], bool], X: int,
           check: bool = False) -> int:
    """Grow closed ``X`` with ``pi(X)`` false to a maximal such closed set."""
    if pi(X):
        raise PreconditionError("max_pi needs a set violating the property")
    cur = X
    outside = lat.contract(lat.full & ~X)
    for g in bits(outside):
        if cur & lat.groups[g]:
            continue
        cand = cur | lat.group_down[g]
        if not pi(cand):
            cur = cand
    if check:
        for g in bits(lat.contract(lat.full & ~cur)):
            assert pi(cur | lat.group_down[g]), "max_pi result is not maximal"
    return cur


@dataclass
class EnumState:
    """Found minimal sets, found maximal non-satisfying sets and the
    discard counter of one incremental call."""

    X: list[int] = field(default_factory=list)
    Y: list[int] = field(default_factory=list)
    discard_count: int = 0
    discard_budget: int | None = None


@dataclass(frozen=True)
class JointStep:
    kind: str  # "minimal", "maximal" or "exhausted"
    set: int | None = None


def joint_gen_step(lat: ClosureLattice, pi: Callable[[int], bool],
                   state: EnumState, **engine_kwargs) -> JointStep:
    """Find a closed set that is minimal-satisfying or maximal-violating and
    not yet in ``state``, or report that both families are complete."""
    P = lat.poset
    ideals = tuple(lat.contract(X) for X in state.X)
    filters = tuple(P.full & ~lat.contract(Y) for Y in state.Y)
    res = check_dual(DualInstance(P, ideals, filters), **engine_kwargs)
    if res.is_dual:
        return JointStep("exhausted")
    Z = lat.expand(res.witness)
    if pi(Z):
        return JointStep("minimal", min_pi(lat, pi, Z))
    return JointStep("maximal", max_pi(lat, pi, Z))


def _avoids(Z: int, family) -> bool:
    return all(X & ~Z for X in family)


def in_dual_family(lat: ClosureLattice, X_family, M: int) -> bool:
    """``M`` is a maximal closed set containing no member of ``X_family``."""
    if not _avoids(M, X_family):
        return False
    for g in bits(lat.contract(lat.full & ~M)):
        if _avoids(M | lat.group_down[g], X_family):
            return False
    return True


def extend_to_dual(lat: ClosureLattice, X_family, M: int) -> int:
    """Greedily grow ``M`` (ascending group ids) while avoiding every member."""
    cur = M
    for g in bits(lat.contract(lat.full & ~M)):
        if cur & lat.groups[g]:
            continue
        cand = cur | lat.group_down[g]
        if _avoids(cand, X_family):
            cur = cand
    return cur


@dataclass(frozen=True)
class EnumIncResult:
    new: int | None  # None when the family is complete
    rounds: int
    discards: int
    budget: int | None

    @property
    def complete(self) -> bool:
        return self.new is None


def enum_inc(lat: ClosureLattice, pi: Callable[[int], bool],
             X_family: Sequence[int], debug: bool = False,
             **engine_kwargs) -> EnumIncResult:
    """Return one minimal closed set satisfying ``pi`` outside ``X_family``,
    or report that none is left.

    For :class:`MonotoneProperty` properties the number of discarded dual
    sets is capped by ``hyperedge_count * len(X_family)``; exceeding it raises
    :class:`BudgetViolation`.  Other monotone callables run unbounded.
    """
    X_family = list(X_family)
    top = lat.full
    if not X_family:
        if not pi(top):
            return EnumIncResult(None, 0, 0, None)
        return EnumIncResult(min_pi(lat, pi, top, check=debug), 0, 0, None)

    if isinstance(pi, MonotoneProperty):
        budget = pi.hyperedge_count * len(X_family)
    else:
        budget = None
        warnings.warn("property is not a system of transversal inequalities; "
                      "no incremental bound is enforced", stacklevel=2)
    state = EnumState(X_family, [], 0, budget)
    rounds = 0
    while True:
        rounds += 1
        step = joint_gen_step(lat, pi, state, debug=debug, **engine_kwargs)
        if step.kind == "exhausted":
            return EnumIncResult(None, rounds, state.discard_count, budget)
        Z = step.set
        if step.kind == "minimal":
            if debug:
                assert Z not in X_family
            return EnumIncResult(Z, rounds, state.discard_count, budget)
        if in_dual_family(lat, X_family, Z):
            state.discard_count += 1
            if budget is not None and state.discard_count > budget:
                raise BudgetViolation(
                    f"{state.discard_count} dual sets discarded, bound is {budget}")
            state.Y.append(Z)
            continue
        Yp = extend_to_dual(lat, X_family, Z)
        if not pi(Yp):
            raise RuntimeError(
                "extension of a maximal violating set does not satisfy the property")
        return EnumIncResult(min_pi(lat, pi, Yp, check=debug), rounds,
                             state.discard_count, budget)


def enumerate_all(lat: ClosureLattice, pi: Callable[[int], bool],
                  debug: bool = False, on_step: Callable | None = None,
                  **engine_kwargs) -> Iterator[int]:
    """Yield every minimal closed set satisfying ``pi`` exactly once."""
    found: list[int] = []
    while True:
        res = enum_inc(lat, pi, found, debug=debug, **engine_kwargs)
        if on_step is not None:
            on_step(res)
        if res.complete:
            return
        found.append(res.new)
        yield res.new

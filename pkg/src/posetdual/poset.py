"""Posets, ideals and filters over bitset element sets.

Elements of a poset with ``n`` elements are the integers ``0..n-1``.  Sets of
elements are plain Python ints used as bitsets (bit ``i`` set means element
``i`` is a member).  Families of sets are tuples of such ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import (
    CycleError,
    IntersectionViolation,
    NotAFilter,
    NotAnIdeal,
    ScaleRefusal,
)

DEFAULT_IDEAL_CAP = 1 << 22


def bits(mask: int) -> Iterator[int]:
    """Yield the members of a bitset in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(ids: Iterable[int]) -> int:
    mask = 0
    for i in ids:
        mask |= 1 << i
    return mask


def popcount(mask: int) -> int:
    return mask.bit_count()


class Poset:
    """Finite poset on ``0..n-1`` stored as principal down/up bitsets.

    ``down[p]`` is the set of elements below or equal to ``p`` and ``up[p]``
    the set of elements above or equal to ``p``.  Instances are immutable.
    """

    __slots__ = ("n", "down", "up", "names", "_index")

    def __init__(self, n: int, down: Sequence[int], up: Sequence[int],
                 names: Sequence[str] | None = None):
        self.n = n
        self.down = tuple(down)
        self.up = tuple(up)
        self.names = tuple(names) if names is not None else None
        self._index = None
        if self.names is not None:
            if len(self.names) != n:
                raise ValueError(f"expected {n} names, got {len(self.names)}")
            if len(set(self.names)) != n:
                raise ValueError("element names must be unique")
            self._index = {name: i for i, name in enumerate(self.names)}

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   names: Sequence[str] | None = None) -> "Poset":
        """Build the reflexive-transitive closure of ``a <= b`` edges."""
        if n < 0:
            raise ValueError("element count must be non-negative")
        up = [1 << i for i in range(n)]
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise IndexError(f"edge ({a}, {b}) out of range for n={n}")
            up[a] |= 1 << b
        # Warshall on bitsets
        for k in range(n):
            kbit = 1 << k
            upk = up[k]
            for i in range(n):
                if up[i] & kbit:
                    up[i] |= upk
        down = [0] * n
        for a in range(n):
            for b in bits(up[a]):
                down[b] |= 1 << a
        for a in range(n):
            both = up[a] & down[a] & ~(1 << a)
            if both:
                b = both.bit_length() - 1
                raise CycleError(f"elements {a} and {b} are mutually related")
        return cls(n, down, up, names)

    @classmethod
    def antichain(cls, n: int, names: Sequence[str] | None = None) -> "Poset":
        return cls.from_edges(n, (), names)

    @classmethod
    def chain(cls, n: int, names: Sequence[str] | None = None) -> "Poset":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)], names)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def leq(self, a: int, b: int) -> bool:
        return bool(self.up[a] >> b & 1)

    def dual(self) -> "Poset":
        """The same ground set with the order reversed."""
        return Poset(self.n, self.up, self.down, self.names)

    def cover_pairs(self) -> list[tuple[int, int]]:
        """Pairs ``(a, b)`` where ``b`` covers ``a``."""
        pairs = []
        for a in range(self.n):
            strict = self.up[a] & ~(1 << a)
            for b in bits(strict):
                between = strict & self.down[b] & ~(1 << b)
                if not between:
                    pairs.append((a, b))
        return pairs

    def index(self, token) -> int:
        """Resolve an element name (or integer id) to its id."""
        if self._index is not None and token in self._index:
            return self._index[token]
        if isinstance(token, int) and 0 <= token < self.n:
            return token
        raise IndexError(f"unknown element {token!r}")

    def mask(self, tokens: Iterable) -> int:
        return to_mask(self.index(t) for t in tokens)

    def label(self, i: int) -> str:
        return self.names[i] if self.names is not None else str(i)

    def labels(self, mask: int) -> list[str]:
        return [self.label(i) for i in bits(mask)]

    def __eq__(self, other):
        return (isinstance(other, Poset) and self.n == other.n
                and self.up == other.up and self.names == other.names)

    def __hash__(self):
        return hash((self.n, self.up, self.names))

    def __repr__(self):
        return f"Poset(n={self.n}, covers={self.cover_pairs()})"


def _check_index(P: Poset, p: int):
    if not 0 <= p < P.n:
        raise IndexError(f"element {p} out of range for n={P.n}")


def down_set(P: Poset, p: int) -> int:
    _check_index(P, p)
    return P.down[p]


def up_set(P: Poset, p: int) -> int:
    _check_index(P, p)
    return P.up[p]


def _check_subset(P: Poset, X: int):
    if X < 0 or X >> P.n:
        raise IndexError(f"set {X:#x} is not a subset of the ground set")


def down_closure(P: Poset, X: int) -> int:
    _check_subset(P, X)
    out = 0
    down = P.down
    for p in bits(X):
        out |= down[p]
    return out


def up_closure(P: Poset, X: int) -> int:
    _check_subset(P, X)
    out = 0
    up = P.up
    for p in bits(X):
        out |= up[p]
    return out


def is_ideal(P: Poset, X: int) -> bool:
    down = P.down
    return all(down[p] & ~X == 0 for p in bits(X))


def is_filter(P: Poset, X: int) -> bool:
    up = P.up
    return all(up[p] & ~X == 0 for p in bits(X))


def normalize_family(family: Iterable[int]) -> tuple[int, ...]:
    """Drop duplicates and members that strictly contain another member.

    The survivors keep their first-occurrence order.
    """
    seen = []
    unique = set()
    for s in family:
        if s not in unique:
            unique.add(s)
            seen.append(s)
    by_size = sorted(seen, key=int.bit_count)
    keep = set()
    kept: list[int] = []
    for s in by_size:
        if not any(k & s == k for k in kept):
            kept.append(s)
            keep.add(s)
    return tuple(s for s in seen if s in keep)


@dataclass(frozen=True)
class DualInstance:
    """A poset, an ideal family and a filter family.

    ``ground`` restricts the instance to an induced subposet; it defaults to
    the whole poset.  Subinstances produced by the decomposition rules share
    the parent's ``Poset`` object and only narrow ``ground``.
    """

    poset: Poset
    ideals: tuple[int, ...]
    filters: tuple[int, ...]
    ground: int = field(default=-1)

    def __post_init__(self):
        if self.ground == -1:
            object.__setattr__(self, "ground", self.poset.full)
        object.__setattr__(self, "ideals", tuple(self.ideals))
        object.__setattr__(self, "filters", tuple(self.filters))

    @property
    def volume(self) -> int:
        return len(self.ideals) * len(self.filters)


def validate_instance(P: Poset, ideals: Iterable[int], filters: Iterable[int],
                      ground: int | None = None) -> DualInstance:
    """Check ideal/filter membership and pairwise intersection, then normalize."""
    Q = P.full if ground is None else ground
    ideals = list(ideals)
    filters = list(filters)
    for I in ideals:
        _check_subset(P, I)
        if I & ~Q or any(P.down[p] & Q & ~I for p in bits(I)):
            raise NotAnIdeal(f"{sorted(P.labels(I))} is not an ideal")
    for F in filters:
        _check_subset(P, F)
        if F & ~Q or any(P.up[p] & Q & ~F for p in bits(F)):
            raise NotAFilter(f"{sorted(P.labels(F))} is not a filter")
    for I in ideals:
        for F in filters:
            if not I & F:
                raise IntersectionViolation(
                    f"ideal {P.labels(I)} and filter {P.labels(F)} are disjoint")
    return DualInstance(P, normalize_family(ideals), normalize_family(filters), Q)


def enumerate_ideals(P: Poset, cap: int = DEFAULT_IDEAL_CAP,
                     ground: int | None = None) -> Iterator[int]:
    """Yield every ideal of ``P`` (restricted to ``ground``) once.

    Ideals come out in ascending order of their bitset value.  Raises
    ``ScaleRefusal`` once more than ``cap`` ideals would be produced.
    """
    Q = P.full if ground is None else ground
    order = sorted(bits(Q), reverse=True)
    down = [d & Q for d in P.down]
    count = 0

    # Decide elements from the highest id down, excluding before including;
    # every consistent partial assignment extends, so there are no dead ends.
    def rec(idx: int, included: int, excluded: int, below_included: int):
        nonlocal count
        if idx == len(order):
            count += 1
            if count > cap:
                raise ScaleRefusal(f"more than {cap} ideals")
            yield included
            return
        p = order[idx]
        bit = 1 << p
        if not below_included & bit:
            yield from rec(idx + 1, included, excluded | bit, below_included)
        if not down[p] & excluded:
            yield from rec(idx + 1, included | bit, excluded,
                           below_included | down[p])

    yield from rec(0, 0, 0, 0)


def satisfies_witness(inst: DualInstance, X: int) -> bool:
    """Condition on ``X``: contains no ideal of the family, meets every filter."""
    return (all(I & ~X for I in inst.ideals)
            and all(X & F for F in inst.filters))


def verify_witness(inst: DualInstance, X: int) -> bool:
    """True iff ``X`` is an ideal of the instance's ground set that
    avoids containing every ideal member and meets every filter member."""
    Q = inst.ground
    if X & ~Q:
        return False
    down = inst.poset.down
    if any(down[p] & Q & ~X for p in bits(X)):
        return False
    return satisfies_witness(inst, X)


def verify_filter_witness(inst: DualInstance, Y: int) -> bool:
    """Mirror check: ``Y`` is a filter witness for the swapped pair.

    ``Y`` must be a filter containing no filter member and meeting every
    ideal member.  For any ``X``, ``verify_witness(inst, X)`` equals
    ``verify_filter_witness(inst, ground & ~X)``.
    """
    Q = inst.ground
    if Y & ~Q:
        return False
    up = inst.poset.up
    if any(up[p] & Q & ~Y for p in bits(Y)):
        return False
    return (all(F & ~Y for F in inst.filters)
            and all(Y & I for I in inst.ideals))


def brute_force_dual(inst: DualInstance, cap: int = DEFAULT_IDEAL_CAP):
    """Decide duality by scanning every ideal; the first witness wins."""
    from .engine import DualResult, RecursionStats

    stats = RecursionStats(calls=1, max_depth=0, root_volume=inst.volume)
    for X in enumerate_ideals(inst.poset, cap, inst.ground):
        if satisfies_witness(inst, X):
            return DualResult(False, X, stats)
    return DualResult(True, None, stats)

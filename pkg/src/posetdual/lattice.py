"""Distributive lattices reduced to posets of join-irreducibles.

Explicit lattices are given by their order relation on ``0..N-1``.  Products
of explicit lattices have tuple elements.  Both reduce, through Birkhoff's
representation, to a poset ``J`` where every lattice element becomes the
ideal of join-irreducibles below it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .engine import DualResult, check_dual
from .errors import (
    AntichainViolation,
    DominationViolation,
    NotALattice,
    NotDistributive,
    RepresentationError,
)
from .poset import (
    DualInstance,
    Poset,
    bits,
    enumerate_ideals,
    is_ideal,
    to_mask,
)

# exhaustive triple test up to this size, Birkhoff ideal count above
TRIPLE_CHECK_MAX = 512


class ExplicitLattice:
    """Finite lattice on ``0..N-1`` with precomputed meet and join tables.

    Construction fails with :class:`NotALattice` when some pair lacks a unique
    least upper or greatest lower bound, and with :class:`NotDistributive`
    unless ``check_distributive=False``.
    """

    def __init__(self, n: int, leq_pairs: Iterable[tuple[int, int]],
                 names: Sequence[str] | None = None,
                 check_distributive: bool = True):
        if n < 1:
            raise NotALattice("a lattice needs at least one element")
        self.order = Poset.from_edges(n, leq_pairs, names)
        self.n = n
        self.names = self.order.names
        self._build_tables()
        self.bottom = int(self._find_extreme(self.order.up))
        self.top = int(self._find_extreme(self.order.down))
        if check_distributive:
            self.check_distributive()

    @classmethod
    def from_ideals(cls, P: Poset) -> "ExplicitLattice":
        """The lattice of ideals of ``P`` ordered by inclusion."""
        ideals = list(enumerate_ideals(P))
        index = {X: i for i, X in enumerate(ideals)}
        edges = []
        for X in ideals:
            for p in bits(P.full & ~X):
                Y = X | 1 << p
                if Y in index:
                    edges.append((index[X], index[Y]))
        names = ["".join(P.labels(X)) or "0" for X in ideals]
        if len(set(names)) != len(names):
            names = None
        lat = cls(len(ideals), edges, names)
        lat.ideal_of = tuple(ideals)
        return lat

    @classmethod
    def chain(cls, length: int) -> "ExplicitLattice":
        return cls(length, [(i, i + 1) for i in range(length - 1)])

    def _find_extreme(self, sets):
        full = self.order.full
        for x in range(self.n):
            if sets[x] == full:
                return x
        raise NotALattice("no least or greatest element")

    def _build_tables(self):
        n = self.n
        up, down = self.order.up, self.order.down
        # a linear extension: |down(x)| grows strictly along the order
        ext = sorted(range(n), key=lambda x: (down[x].bit_count(), x))
        pos = {x: i for i, x in enumerate(ext)}

        def relabel(sets):
            out = []
            for s in sets:
                out.append(to_mask(pos[y] for y in bits(s)))
            return out

        up_e, down_e = relabel(up), relabel(down)
        join = np.empty((n, n), dtype=np.int32)
        meet = np.empty((n, n), dtype=np.int32)
        for x in range(n):
            ux, dx = up_e[x], down_e[x]
            for y in range(x, n):
                U = ux & up_e[y]
                if not U:
                    raise NotALattice(f"{self._name(x)} and {self._name(y)} "
                                      "have no upper bound")
                z = ext[(U & -U).bit_length() - 1]
                if up_e[z] != U:
                    raise NotALattice(f"{self._name(x)} and {self._name(y)} "
                                      "have no least upper bound")
                D = dx & down_e[y]
                if not D:
                    raise NotALattice(f"{self._name(x)} and {self._name(y)} "
                                      "have no lower bound")
                w = ext[D.bit_length() - 1]
                if down_e[w] != D:
                    raise NotALattice(f"{self._name(x)} and {self._name(y)} "
                                      "have no greatest lower bound")
                join[x, y] = join[y, x] = z
                meet[x, y] = meet[y, x] = w
        self.join_table = join
        self.meet_table = meet

    def _name(self, x):
        return self.names[x] if self.names is not None else str(x)

    def leq(self, x, y) -> bool:
        return self.order.leq(x, y)

    def join(self, x, y) -> int:
        return int(self.join_table[x, y])

    def meet(self, x, y) -> int:
        return int(self.meet_table[x, y])

    def elements(self):
        return range(self.n)

    def __len__(self):
        return self.n

    def index(self, token) -> int:
        return self.order.index(token)

    def label(self, x) -> str:
        return self._name(x)

    def check_distributive(self):
        if self.n <= TRIPLE_CHECK_MAX:
            join, meet = self.join_table, self.meet_table
            for x in range(self.n):
                mx = meet[x]
                lhs = mx[join]
                rhs = join[np.ix_(mx, mx)]
                if not np.array_equal(lhs, rhs):
                    y, z = map(int, np.argwhere(lhs != rhs)[0])
                    raise NotDistributive(
                        f"x={self._name(x)}, y={self._name(y)}, z={self._name(z)}"
                        " violate x^(yvz) = (x^y)v(x^z)")
            return
        # a finite lattice is distributive iff it has exactly as many
        # elements as its join-irreducible poset has ideals
        J = self._join_irreducibles()
        jp = _induced_poset(self.order, J)
        count = sum(1 for _ in enumerate_ideals(jp, cap=self.n + 1))
        if count != self.n:
            raise NotDistributive(
                f"{self.n} elements but {count} ideals of join-irreducibles")

    def _join_irreducibles(self) -> list[int]:
        down = self.order.down
        out = []
        for x in range(self.n):
            if x == self.bottom:
                continue
            strict = down[x] & ~(1 << x)
            covers = sum(1 for y in bits(strict)
                         if self.order.up[y] & strict == 1 << y)
            if covers == 1:
                out.append(x)
        return out


def _induced_poset(order: Poset, elems: Sequence[int],
                   names: Sequence[str] | None = None) -> Poset:
    edges = [(i, j) for i, a in enumerate(elems) for j, b in enumerate(elems)
             if i != j and order.leq(a, b)]
    return Poset.from_edges(len(elems), edges, names)


class ProductLattice:
    """Cartesian product of explicit distributive lattices; elements are tuples."""

    def __init__(self, factors: Sequence[ExplicitLattice]):
        if not factors:
            raise NotALattice("a product needs at least one factor")
        self.factors = tuple(factors)

    def leq(self, x, y) -> bool:
        return all(L.leq(a, b) for L, a, b in zip(self.factors, x, y))

    def join(self, x, y):
        return tuple(L.join(a, b) for L, a, b in zip(self.factors, x, y))

    def meet(self, x, y):
        return tuple(L.meet(a, b) for L, a, b in zip(self.factors, x, y))

    @property
    def bottom(self):
        return tuple(L.bottom for L in self.factors)

    @property
    def top(self):
        return tuple(L.top for L in self.factors)

    def elements(self):
        return itertools.product(*(range(L.n) for L in self.factors))

    def __len__(self):
        size = 1
        for L in self.factors:
            size *= L.n
        return size

    def index(self, tokens):
        if len(tokens) != len(self.factors):
            raise ValueError(
                f"expected {len(self.factors)} coordinates, got {len(tokens)}")
        return tuple(L.index(t) for L, t in zip(self.factors, tokens))

    def label(self, x) -> str:
        return "(" + ",".join(L.label(a) for L, a in zip(self.factors, x)) + ")"


def join_irreducibles(L: ExplicitLattice | ProductLattice) -> list:
    """Non-bottom elements that cover exactly one element.

    For a product these are the padded tuples carrying one factor's
    join-irreducible and bottoms elsewhere.
    """
    if isinstance(L, ProductLattice):
        out = []
        bottom = L.bottom
        for i, f in enumerate(L.factors):
            for j in f._join_irreducibles():
                t = list(bottom)
                t[i] = j
                out.append(tuple(t))
        return out
    return L._join_irreducibles()


class BirkhoffMap:
    """Order isomorphism between a distributive lattice and the ideals of
    its join-irreducible poset."""

    def __init__(self, lattice, irreducibles: list, poset: Poset,
                 factor_maps: Sequence["BirkhoffMap"] | None = None):
        self.lattice = lattice
        self.irreducibles = irreducibles
        self.poset = poset
        self._factor_maps = factor_maps
        if factor_maps is not None:
            self._offsets = list(itertools.accumulate(
                [0] + [fm.poset.n for fm in factor_maps]))
        self._codes = None
        if factor_maps is None:
            self._codes = {}
            for x in lattice.elements():
                self._codes[x] = to_mask(
                    i for i, j in enumerate(irreducibles) if lattice.leq(j, x))
            self._decode = {code: x for x, code in self._codes.items()}

    def encode(self, x) -> int:
        if self._factor_maps is None:
            return self._codes[x]
        code = 0
        for fm, off, a in zip(self._factor_maps, self._offsets, x):
            code |= fm.encode(a) << off
        return code

    def decode(self, X: int):
        """Join of the irreducibles in ``X`` (the bottom for ``X == 0``)."""
        if self._factor_maps is None:
            if X in self._decode:
                return self._decode[X]
            out = self.lattice.bottom
            for i in bits(X):
                out = self.lattice.join(out, self.irreducibles[i])
            return out
        parts = []
        for fm, off in zip(self._factor_maps, self._offsets):
            parts.append(fm.decode(X >> off & ((1 << fm.poset.n) - 1)))
        return tuple(parts)

    def verify(self):
        """Check round trip, ideal images and order isomorphism exhaustively."""
        L = self.lattice
        elems = list(L.elements())
        codes = {x: self.encode(x) for x in elems}
        for x in elems:
            if self.decode(codes[x]) != x:
                raise RepresentationError(f"decode(encode({x!r})) != {x!r}")
            if not is_ideal(self.poset, codes[x]):
                raise RepresentationError(f"encode({x!r}) is not an ideal")
        if len(set(codes.values())) != len(elems):
            raise RepresentationError("encoding is not injective")
        for x in elems:
            for y in elems:
                if L.leq(x, y) != (codes[x] & ~codes[y] == 0):
                    raise RepresentationError(
                        f"order not preserved between {x!r} and {y!r}")


def birkhoff_poset(L: ExplicitLattice, verify: bool = True) -> BirkhoffMap:
    J = L._join_irreducibles()
    names = [L.label(j) for j in J]
    P = _induced_poset(L.order, J, names if len(set(names)) == len(names) else None)
    bmap = BirkhoffMap(L, J, P)
    if verify:
        bmap.verify()
    return bmap


def product_poset(L: ProductLattice, verify: bool = True) -> BirkhoffMap:
    """Disjoint union of the factors' join-irreducible posets."""
    maps = [birkhoff_poset(f, verify=verify) for f in L.factors]
    down, up, names = [], [], []
    off = 0
    for i, fm in enumerate(maps):
        for p in range(fm.poset.n):
            down.append(fm.poset.down[p] << off)
            up.append(fm.poset.up[p] << off)
            names.append(f"{i}:{fm.poset.label(p)}")
        off += fm.poset.n
    P = Poset(off, down, up, names)
    return BirkhoffMap(L, join_irreducibles(L), P, factor_maps=maps)


def as_birkhoff(L) -> BirkhoffMap:
    if isinstance(L, BirkhoffMap):
        return L
    if isinstance(L, ProductLattice):
        return product_poset(L)
    return birkhoff_poset(L)


@dataclass(frozen=True)
class LatticeDualResult:
    is_dual: bool
    witness: object
    result: DualResult
    instance: DualInstance

    @property
    def verdict(self) -> str:
        return "DUAL" if self.is_dual else "NOT_DUAL"


def _check_antichain(L, elems, label):
    for a, b in itertools.combinations(elems, 2):
        if L.leq(a, b) or L.leq(b, a):
            raise AntichainViolation(f"{label} is not an antichain: "
                                     f"{L.label(a)} and {L.label(b)} are comparable")


def lattice_dual(L, A: Sequence, B: Sequence, **engine_kwargs) -> LatticeDualResult:
    """Decide whether every lattice element lies above some ``a`` in ``A`` or
    below some ``b`` in ``B``; otherwise return an element doing neither.

    ``L`` is an :class:`ExplicitLattice`, a :class:`ProductLattice`, or a
    prebuilt :class:`BirkhoffMap`.
    """
    bmap = as_birkhoff(L)
    lat = bmap.lattice
    A = list(dict.fromkeys(A))
    B = list(dict.fromkeys(B))
    _check_antichain(lat, A, "A")
    _check_antichain(lat, B, "B")
    for a in A:
        for b in B:
            if lat.leq(a, b):
                raise DominationViolation(
                    f"{lat.label(a)} lies below {lat.label(b)}")
    P = bmap.poset
    ideals = tuple(bmap.encode(a) for a in A)
    filters = tuple(P.full & ~bmap.encode(b) for b in B)
    inst = DualInstance(P, ideals, filters)
    res = check_dual(inst, **engine_kwargs)
    witness = None if res.is_dual else bmap.decode(res.witness)
    return LatticeDualResult(res.is_dual, witness, res, inst)


def lattice_witness_ok(L, A, B, x) -> bool:
    """``x`` lies above no member of ``A`` and below no member of ``B``."""
    return (not any(L.leq(a, x) for a in A)
            and not any(L.leq(x, b) for b in B))


def lattice_dual_bruteforce(L, A, B):
    """Scan every lattice element; returns the first witness or ``None``."""
    for x in L.elements():
        if lattice_witness_ok(L, A, B, x):
            return x
    return None

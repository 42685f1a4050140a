"""Quasi-polynomial duality testing for ideal/filter families of a poset.

The recursion works on triples ``(Q, I, F)`` where ``Q`` is the bitset of the
current induced subposet and ``I``/``F`` are tuples of bitsets inside ``Q``.
Every subposet created along the way is an ideal or a filter of its parent,
so a witness found in a child lifts to the parent by adding the removed
ideal part (filter children) or unchanged (ideal children).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import DomainError, PreconditionError
from .poset import (
    DualInstance,
    Poset,
    bits,
    normalize_family,
    popcount,
    satisfies_witness,
    verify_witness,
)

# below this root volume the process pool costs more than it saves
PARALLEL_MIN_VOLUME = 256

_CHI_FLOOR = math.exp(-2.0 / math.e)


def chi(v: float) -> float:
    """Positive root of ``(x/2)**x == v``.

    For ``v >= 1`` the root is unique and at least 2.  For
    ``exp(-2/e) <= v < 1`` the equation has two roots below 2 and the larger
    one is returned, which keeps the function continuous and increasing.
    """
    if not v > 0:
        raise DomainError(f"chi is undefined for v={v!r}")
    if v < _CHI_FLOOR:
        raise DomainError(f"(x/2)**x has minimum exp(-2/e); no root for v={v!r}")
    target = math.log(v)
    if target == 0.0:
        return 2.0

    def g(x):
        return x * math.log(x / 2.0) - target

    if v > 1:
        lo, hi = 2.0, 4.0
        while g(hi) < 0:
            lo, hi = hi, hi * 2.0
    else:
        lo, hi = 2.0 / math.e, 2.0
    # g is increasing on [2/e, inf)
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    slope = math.log(x / 2.0) + 1.0
    if slope > 1e-6:
        polished = x - g(x) / slope
        if lo - 1e-9 <= polished <= hi + 1e-9:
            x = polished
    return x


def call_bound(v: float) -> float:
    """``max(1, v**chi(v))``, the recursion-count ceiling for root volume v."""
    if v < 1:
        return 1.0
    return max(1.0, v ** chi(v))


@dataclass(frozen=True)
class Epsilons:
    eps1: float
    eps2: float
    v: float


def epsilons(v: float) -> Epsilons:
    c = chi(v)
    return Epsilons(1.0 / c, 2.0 / c, v)


@dataclass
class RecursionStats:
    calls: int = 0
    max_depth: int = 0
    root_volume: int = 0
    branches: dict = field(default_factory=dict)

    @property
    def bound(self) -> float:
        return call_bound(self.root_volume)

    def merge(self, other: "RecursionStats", depth_offset: int = 0):
        self.calls += other.calls
        self.max_depth = max(self.max_depth, other.max_depth + depth_offset)
        for key, count in other.branches.items():
            self.branches[key] = self.branches.get(key, 0) + count


@dataclass(frozen=True)
class DualResult:
    is_dual: bool
    witness: int | None
    stats: RecursionStats

    @property
    def verdict(self) -> str:
        return "DUAL" if self.is_dual else "NOT_DUAL"


@dataclass(frozen=True)
class BalanceRecord:
    """Everything needed to re-check one balanced-set construction."""

    side: str  # "ideal" or "filter"
    ground: int
    family: tuple
    large: int
    S: int
    inside: int
    eps1: float
    eps2: float


@dataclass(frozen=True)
class TraceEvent:
    depth: int
    volume: int
    branch: str
    m: int
    k: int
    child_volumes: tuple = ()
    pivot: int | None = None
    balance: BalanceRecord | None = None

    def format(self) -> str:
        line = (f"depth={self.depth} v={self.volume} m={self.m} k={self.k} "
                f"branch={self.branch}")
        if self.pivot is not None:
            line += f" pivot={self.pivot}"
        if self.child_volumes:
            line += " children=" + ",".join(map(str, self.child_volumes))
        return line


def large_degree_set(H: Sequence[int], eps: float) -> int:
    """Elements lying in at least ``eps * len(H)`` members of ``H``."""
    if not H:
        raise PreconditionError("large_degree_set needs a nonempty family")
    threshold = eps * len(H)
    union = 0
    for h in H:
        union |= h
    out = 0
    for p in bits(union):
        deg = 0
        for h in H:
            deg += h >> p & 1
        if deg >= threshold:
            out |= 1 << p
    return out


def _induced_count(H, S):
    return sum(1 for h in H if not h & ~S)


def _balanced_superset(Q: int, H: Sequence[int], eps1: float, eps2: float,
                       large: int) -> tuple[int, int]:
    """Scan ``Q \\ large`` in ascending id order, shrinking ``S'`` until the
    next removal would leave at most ``(1 - eps2)|H|`` members inside.

    Returns ``(S, |H_S|)`` with ``S = large | union of members inside S'``.
    """
    m = len(H)
    threshold = (1.0 - eps2) * m
    alive = list(H)
    for p in bits(Q & ~large):
        bit = 1 << p
        keep = [h for h in alive if not h & bit]
        if len(keep) <= threshold:
            break
        alive = keep
    else:
        raise PreconditionError(
            "no balanced set: the large-degree part holds too many members")
    S = large
    for h in alive:
        S |= h
    return S, len(alive)


def _check_balance_args(H, eps1, eps2):
    if not H:
        raise PreconditionError("balanced set needs a nonempty family")
    if not 0 < eps1 < eps2 < 1:
        raise PreconditionError(f"need 0 < eps1 < eps2 < 1, got {eps1}, {eps2}")


def find_balanced_ideal(P: Poset, I: Sequence[int], eps1: float, eps2: float,
                        ground: int | None = None) -> int:
    """Ideal ``S`` containing the large-degree elements of ``I`` with
    ``(1-eps2)|I| <= |I_S| < (1-(eps2-eps1))|I|``."""
    _check_balance_args(I, eps1, eps2)
    Q = P.full if ground is None else ground
    L = large_degree_set(I, eps1)
    if _induced_count(I, L) > (1.0 - eps2) * len(I):
        raise PreconditionError(
            "too many ideals lie inside the large-degree set")
    return _balanced_superset(Q, I, eps1, eps2, L)[0]


def find_balanced_filter(P: Poset, F: Sequence[int], eps1: float, eps2: float,
                         ground: int | None = None) -> int:
    """Order-reversed counterpart of :func:`find_balanced_ideal`."""
    _check_balance_args(F, eps1, eps2)
    Q = P.full if ground is None else ground
    L = large_degree_set(F, eps1)
    if _induced_count(F, L) > (1.0 - eps2) * len(F):
        raise PreconditionError(
            "too many filters lie inside the large-degree set")
    return _balanced_superset(Q, F, eps1, eps2, L)[0]


def _dedupe(family):
    return tuple(dict.fromkeys(family))


def _up_within(P, Q, X):
    out = 0
    up = P.up
    for p in bits(X):
        out |= up[p]
    return out & Q


def _down_within(P, Q, X):
    out = 0
    down = P.down
    for p in bits(X):
        out |= down[p]
    return out & Q


def decompose_element(inst: DualInstance, p: int):
    """Split on element ``p`` into instances on ``Q \\ p-`` and ``Q \\ p+``.

    Families are projected/induced as the element decomposition prescribes and
    deduplicated, but not minimalized.
    """
    P, Q = inst.poset, inst.ground
    if not Q >> p & 1:
        raise IndexError(f"element {p} is not in the ground set")
    pd = P.down[p] & Q
    pu = P.up[p] & Q
    first = DualInstance(
        P, _dedupe(I & ~pd for I in inst.ideals),
        _dedupe(F for F in inst.filters if not F & pd), Q & ~pd)
    second = DualInstance(
        P, _dedupe(I for I in inst.ideals if not I & pu),
        _dedupe(F & ~pu for F in inst.filters), Q & ~pu)
    return first, second


def decompose_ideal(inst: DualInstance, S: int):
    """Split along an ideal ``S``: the instance inside ``S`` plus one
    instance on ``Q \\ Y+`` per distinct trace ``Y`` of a filter on ``S``."""
    P, Q = inst.poset, inst.ground
    if S & ~Q or any(P.down[p] & Q & ~S for p in bits(S)):
        raise PreconditionError("S is not an ideal of the ground set")
    traces = _dedupe(F & S for F in inst.filters)
    inside = DualInstance(
        P, _dedupe(I for I in inst.ideals if not I & ~S), traces, S)
    parts = []
    for Y in traces:
        Yup = _up_within(P, Q, Y)
        R = Q & ~Yup
        parts.append(DualInstance(
            P, _dedupe(I for I in inst.ideals if not I & ~R),
            _dedupe(F & R for F in inst.filters), R))
    return inside, parts


def decompose_filter(inst: DualInstance, S: int):
    """Order-reversed counterpart of :func:`decompose_ideal`."""
    P, Q = inst.poset, inst.ground
    if S & ~Q or any(P.up[p] & Q & ~S for p in bits(S)):
        raise PreconditionError("S is not a filter of the ground set")
    traces = _dedupe(I & S for I in inst.ideals)
    inside = DualInstance(
        P, traces, _dedupe(F for F in inst.filters if not F & ~S), S)
    parts = []
    for Y in traces:
        Ydown = _down_within(P, Q, Y)
        R = Q & ~Ydown
        parts.append(DualInstance(
            P, _dedupe(I & R for I in inst.ideals),
            _dedupe(F for F in inst.filters if not F & ~R), R))
    return inside, parts


def _simple(P: Poset, Q: int, I, F):
    """Duality when one family has at most one member.

    Returns ``(is_dual, witness)``.
    """
    if 0 in I or 0 in F:
        return True, None
    if not F:
        return False, 0
    if not I:
        return False, Q
    if len(I) == 1:
        for p in bits(I[0]):
            pu = P.up[p] & Q
            if not any(not G & ~pu for G in F):
                return False, Q & ~pu
        return True, None
    if len(F) == 1:
        for p in bits(F[0]):
            pd = P.down[p] & Q
            if not any(not A & ~pd for A in I):
                return False, pd
        return True, None
    raise PreconditionError("simple_dual needs a family with at most one member")


def simple_dual(inst: DualInstance) -> DualResult:
    is_dual, X = _simple(inst.poset, inst.ground, inst.ideals, inst.filters)
    stats = RecursionStats(calls=1, max_depth=0, root_volume=inst.volume,
                           branches={"simple": 1})
    return DualResult(is_dual, X, stats)


@dataclass
class _Child:
    Q: int
    I: tuple
    F: tuple
    lift: int


class _Context:
    def __init__(self, P: Poset, debug: bool, trace: Callable | None):
        self.P = P
        self.debug = debug
        self.trace = trace
        self.stats = RecursionStats()

    def count(self, branch, depth):
        st = self.stats
        st.calls += 1
        if depth > st.max_depth:
            st.max_depth = depth
        st.branches[branch] = st.branches.get(branch, 0) + 1


def _expand(ctx: _Context, Q: int, I: tuple, F: tuple, depth: int):
    """One step of the recursion: either a verdict or a list of children."""
    P = ctx.P
    m, k = len(I), len(F)
    if min(m, k) <= 1:
        ctx.count("simple", depth)
        if ctx.trace is not None:
            ctx.trace(TraceEvent(depth, m * k, "simple", m, k))
        return _simple(P, Q, I, F)

    v = m * k
    eps = epsilons(v)
    eps1, eps2 = eps.eps1, eps.eps2
    L1 = large_degree_set(I, eps1)
    L2 = large_degree_set(F, eps1)
    n_inside_1 = _induced_count(I, L1)
    n_inside_2 = _induced_count(F, L2)
    pivot = None
    balance = None

    if n_inside_1 >= 1 and n_inside_2 >= 1:
        branch = "element"
        common = L1 & L2
        if common:
            p = (common & -common).bit_length() - 1
        else:  # unreachable while every pair intersects
            p = _max_degree_element(I, F)
        pivot = p
        pd = P.down[p] & Q
        pu = P.up[p] & Q
        children = [
            _Child(Q & ~pd, normalize_family(A & ~pd for A in I),
                   normalize_family(B for B in F if not B & pd), pd),
            _Child(Q & ~pu, normalize_family(A for A in I if not A & pu),
                   normalize_family(B & ~pu for B in F), 0),
        ]
    elif n_inside_1 == 0:
        branch = "ideal-split"
        S, inside = _balanced_superset(Q, I, eps1, eps2, L1)
        balance = BalanceRecord("ideal", Q, I, L1, S, inside, eps1, eps2)
        _assert_balance(m, inside, eps1, eps2)
        traces = normalize_family(B & S for B in F)
        children = [_Child(S, normalize_family(A for A in I if not A & ~S),
                           traces, 0)]
        for Y in traces:
            R = Q & ~_up_within(P, Q, Y)
            children.append(_Child(
                R, normalize_family(A for A in I if not A & ~R),
                normalize_family(B & R for B in F), 0))
    else:
        branch = "filter-split"
        S, inside = _balanced_superset(Q, F, eps1, eps2, L2)
        balance = BalanceRecord("filter", Q, F, L2, S, inside, eps1, eps2)
        _assert_balance(k, inside, eps1, eps2)
        traces = normalize_family(A & S for A in I)
        outside = Q & ~S
        children = [_Child(S, traces,
                           normalize_family(B for B in F if not B & ~S),
                           outside)]
        for Y in traces:
            Yd = _down_within(P, Q, Y)
            R = Q & ~Yd
            children.append(_Child(
                R, normalize_family(A & R for A in I),
                normalize_family(B for B in F if not B & ~R), Yd))

    ctx.count(branch, depth)
    if ctx.trace is not None:
        ctx.trace(TraceEvent(depth, v, branch, m, k,
                             tuple(len(c.I) * len(c.F) for c in children),
                             pivot, balance))
    if ctx.debug:
        for c in children:
            for A in c.I:
                for B in c.F:
                    assert A & B, "child instance lost the intersection property"
    return children


def _assert_balance(size, inside, eps1, eps2):
    outside_frac = (size - inside) / size
    assert eps2 - eps1 < outside_frac + 1e-12 and outside_frac <= eps2 + 1e-12, (
        f"balanced split fraction {outside_frac} outside "
        f"({eps2 - eps1}, {eps2}]")


def _max_degree_element(I, F):
    best, best_deg = None, -1
    union = 0
    for h in (*I, *F):
        union |= h
    for p in bits(union):
        deg = sum(h >> p & 1 for h in I) + sum(h >> p & 1 for h in F)
        if deg > best_deg:
            best, best_deg = p, deg
    return best


def _solve(ctx: _Context, Q: int, I: tuple, F: tuple, depth: int):
    node = _expand(ctx, Q, I, F, depth)
    if isinstance(node, tuple):
        return node
    for child in node:
        is_dual, X = _solve(ctx, child.Q, child.I, child.F, depth + 1)
        if not is_dual:
            X |= child.lift
            if ctx.debug:
                _check_lift(ctx.P, Q, I, F, X)
            return False, X
    return True, None


def _check_lift(P, Q, I, F, X):
    inst = DualInstance(P, I, F, Q)
    assert verify_witness(inst, X), "lifted witness does not verify"


def _solve_child(P, Q, I, F, debug):
    ctx = _Context(P, debug, None)
    is_dual, X = _solve(ctx, Q, I, F, 0)
    return is_dual, X, ctx.stats


def check_dual(inst: DualInstance, *, trace: Callable | None = None,
               debug: bool = False, workers: int = 1) -> DualResult:
    """Decide whether ``(inst.ideals, inst.filters)`` is a dual pair.

    ``trace`` receives one :class:`TraceEvent` per recursive call.  With
    ``workers > 1`` the children of the root run in a process pool; every
    child is then evaluated (no short-circuit) and the witness of the first
    non-dual child in child order is reported, so results stay deterministic.
    Tracing forces sequential evaluation.
    """
    import sys

    P = inst.poset
    limit = 2 * P.n + 200
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)

    ctx = _Context(P, debug, trace)
    Q, I, F = inst.ground, tuple(inst.ideals), tuple(inst.filters)
    parallel = workers > 1 and trace is None and len(I) * len(F) >= PARALLEL_MIN_VOLUME
    if not parallel:
        is_dual, X = _solve(ctx, Q, I, F, 0)
    else:
        node = _expand(ctx, Q, I, F, 0)
        if isinstance(node, tuple):
            is_dual, X = node
        else:
            is_dual, X = True, None
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_solve_child, P, c.Q, c.I, c.F, debug)
                           for c in node]
                for child, fut in zip(node, futures):
                    c_dual, c_X, c_stats = fut.result()
                    ctx.stats.merge(c_stats, depth_offset=1)
                    if is_dual and not c_dual:
                        is_dual, X = False, c_X | child.lift
    stats = ctx.stats
    stats.root_volume = len(I) * len(F)
    if not is_dual and debug:
        assert verify_witness(inst, X), "witness does not verify"
    return DualResult(is_dual, X, stats)

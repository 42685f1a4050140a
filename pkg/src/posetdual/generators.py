"""Seeded random instance generators for tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ScaleRefusal
from .poset import (
    DualInstance,
    Poset,
    bits,
    down_closure,
    enumerate_ideals,
    normalize_family,
    to_mask,
    up_closure,
)

MODES = ("random", "exactly-dual", "near-dual")

# exactly-dual mode enumerates all ideals
ORACLE_MAX_N = 20


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int = 0
    n: int = 8
    density: float = 0.2
    m: int = 4
    k: int = 4
    mode: str = "random"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must lie in [0, 1]")
        if self.m < 0 or self.k < 0:
            raise ValueError("family sizes must be non-negative")


def random_poset(rng: random.Random, n: int, density: float) -> Poset:
    """Random DAG order: edges along a hidden random linear extension."""
    perm = list(range(n))
    rng.shuffle(perm)
    edges = [(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n)
             if rng.random() < density]
    return Poset.from_edges(n, edges)


def _random_subset(rng, n, max_size):
    size = rng.randint(1, max(1, max_size))
    return sum(1 << p for p in rng.sample(range(n), min(size, n)))


def random_ideals(rng, P: Poset, m: int) -> list[int]:
    """Down-closures of one to three random generators."""
    gen_size = min(3, max(1, P.n // 4))
    return [down_closure(P, _random_subset(rng, P.n, gen_size)) for _ in range(m)]


def _random_filter(rng, P: Poset, ideals) -> int:
    """Up-closure of a random, greedily pruned hitting set of ``ideals``."""
    order = list(ideals)
    rng.shuffle(order)
    picks = []
    covered = 0
    for I in order:
        if covered & I:
            continue
        p = rng.choice(list(bits(I)))
        picks.append(p)
        covered |= P.up[p]
    rng.shuffle(picks)
    hits = [sum(1 for q in picks if P.up[q] & I) for I in ideals]
    for p in list(picks):
        touched = [i for i, I in enumerate(ideals) if P.up[p] & I]
        if len(picks) > 1 and all(hits[i] >= 2 for i in touched):
            picks.remove(p)
            for i in touched:
                hits[i] -= 1
    if not picks or rng.random() < 0.25:
        picks.append(rng.randrange(P.n))
    return up_closure(P, to_mask(picks))


def _maximal_avoiding(P: Poset, ideals) -> list[int]:
    """All maximal ideals containing no member of ``ideals``."""
    avoiding = [X for X in enumerate_ideals(P)
                if all(I & ~X for I in ideals)]
    avoiding.sort(key=lambda X: -bin(X).count("1"))
    maximal: list[int] = []
    for X in avoiding:
        if not any(X & ~M == 0 for M in maximal):
            maximal.append(X)
    return sorted(maximal)


def gen_instance(spec: GeneratorSpec) -> DualInstance:
    rng = random.Random(spec.seed)
    P = random_poset(rng, spec.n, spec.density)
    ideals = list(normalize_family(random_ideals(rng, P, spec.m)))
    if spec.mode == "random":
        filters = [_random_filter(rng, P, ideals) for _ in range(spec.k)]
        # repair by discarding filters that miss some ideal
        filters = [F for F in filters if all(F & I for I in ideals)]
        return DualInstance(P, ideals, normalize_family(filters))
    if spec.n > ORACLE_MAX_N:
        raise ScaleRefusal(
            f"{spec.mode} mode enumerates ideals; n={spec.n} exceeds {ORACLE_MAX_N}")
    filters = [P.full & ~M for M in _maximal_avoiding(P, ideals)]
    if spec.mode == "near-dual" and filters:
        filters.pop(rng.randrange(len(filters)))
    return DualInstance(P, ideals, tuple(filters))


def mixed_specs(count: int, seed: int = 0, max_n: int = 10, max_family: int = 8):
    """Deterministic stream of small specs cycling through all modes."""
    rng = random.Random(seed)
    for i in range(count):
        yield GeneratorSpec(
            seed=rng.randrange(1 << 30),
            n=rng.randint(1, max_n),
            density=rng.choice((0.0, 0.1, 0.2, 0.35, 0.5)),
            m=rng.randint(0, max_family),
            k=rng.randint(0, max_family),
            mode=MODES[i % 3],
        )

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import closure, naive_dual, to_set
from posetdual.engine import (
    PARALLEL_MIN_VOLUME,
    call_bound,
    check_dual,
    chi,
    decompose_element,
    decompose_filter,
    decompose_ideal,
    epsilons,
    find_balanced_filter,
    find_balanced_ideal,
    large_degree_set,
    simple_dual,
)
from posetdual.errors import DomainError, PreconditionError
from posetdual.generators import GeneratorSpec, gen_instance, mixed_specs
from posetdual.poset import (
    DualInstance,
    Poset,
    brute_force_dual,
    enumerate_ideals,
    is_filter,
    is_ideal,
    validate_instance,
    verify_witness,
)


def newton_root(v):
    # x log(x/2) = log v, Newton from the right of the minimum
    x = 4.0 + math.log(v)
    for _ in range(200):
        g = x * math.log(x / 2) - math.log(v)
        x -= g / (math.log(x / 2) + 1)
    return x


def fig1():
    return Poset.from_edges(4, [(0, 2), (1, 2), (1, 3)], ["1", "2", "3", "4"])


def fig1_instance(filters=(("2", "3", "4"),)):
    P = fig1()
    return validate_instance(P, [P.mask(["1", "2"]), P.mask(["2", "4"])],
                             [P.mask(f) for f in filters])


# chi


@pytest.mark.parametrize("v", [1, 2, 4, 16, 1e3, 1e6, 1e12])
def test_chi_solves_equation(v):
    x = chi(v)
    assert abs((x / 2) ** x - v) <= 1e-9 * max(1, v)
    assert x == pytest.approx(newton_root(v), rel=1e-12)


def test_chi_exact_points():
    assert chi(1) == pytest.approx(2, abs=1e-12)
    assert chi(16) == pytest.approx(4, abs=1e-12)
    assert chi(4) == pytest.approx(3.1192209, abs=1e-7)


def test_chi_monotone_and_slow():
    grid = [1 + i * 37.3 for i in range(1000)]
    vals = [chi(v) for v in grid]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    # grows like log v / log log v
    assert chi(1e12) < math.log(1e12)


def test_chi_below_one():
    lo = math.exp(-2 / math.e)
    assert chi(lo) == pytest.approx(2 / math.e, abs=1e-5)
    x = chi(0.9)
    assert 2 / math.e < x < 2 and (x / 2) ** x == pytest.approx(0.9)
    for bad in (0, -1, lo / 2):
        with pytest.raises(DomainError):
            chi(bad)


def test_call_bound():
    assert call_bound(0) == 1
    assert call_bound(1) == 1
    assert call_bound(16) == pytest.approx(16 ** 4)


def test_epsilons_window():
    e = epsilons(100)
    assert 0 < e.eps1 < e.eps2 < 1
    assert e.eps2 == pytest.approx(2 * e.eps1)


# large degree and balanced sets


def test_large_degree_threshold_inclusive():
    H = [0b011, 0b001, 0b110, 0b100]
    # element 0 in 2/4, element 1 in 2/4, element 2 in 2/4
    assert large_degree_set(H, 0.5) == 0b111
    assert large_degree_set(H, 0.51) == 0
    with pytest.raises(PreconditionError):
        large_degree_set([], 0.5)


def test_large_degree_fig1():
    P = fig1()
    I = [P.mask(["1", "2"]), P.mask(["2", "4"])]
    assert P.labels(large_degree_set(I, 1 / chi(2))) == ["1", "2", "4"]


def test_balanced_ideal_on_antichain():
    P = Poset.antichain(12)
    I = [1 << i | 1 << (i + 6) for i in range(6)]
    eps1, eps2 = 0.25, 0.5
    S = find_balanced_ideal(P, I, eps1, eps2)
    assert is_ideal(P, S)
    inside = sum(1 for A in I if A & ~S == 0)
    assert (1 - eps2) * len(I) <= inside < (1 - (eps2 - eps1)) * len(I)
    assert large_degree_set(I, eps1) & ~S == 0


def test_balanced_filter_on_chain_pairs():
    P = Poset.from_edges(16, [(i, i + 8) for i in range(8)])
    F = [P.up[i] for i in range(8)]
    S = find_balanced_filter(P, F, 0.25, 0.5)
    assert is_filter(P, S)
    inside = sum(1 for B in F if B & ~S == 0)
    assert 4 <= inside < 6


def test_balanced_preconditions():
    P = Poset.antichain(3)
    with pytest.raises(PreconditionError):
        find_balanced_ideal(P, [0b1], 0.6, 0.5)
    with pytest.raises(PreconditionError):
        find_balanced_ideal(P, [], 0.1, 0.2)
    # every member lies inside the large-degree set
    with pytest.raises(PreconditionError):
        find_balanced_ideal(P, [0b1, 0b1], 0.1, 0.2)


# decompositions


def test_figure3_element_decomposition():
    inst = fig1_instance()
    P = inst.poset
    first, second = decompose_element(inst, P.index("1"))
    fam = lambda fs: [P.labels(x) for x in fs]
    assert fam(first.ideals) == [["2"], ["2", "4"]]
    assert fam(first.filters) == [["2", "3", "4"]]
    assert fam(second.ideals) == [["2", "4"]]
    assert fam(second.filters) == [["2", "4"]]
    assert P.labels(first.ground) == ["2", "3", "4"]
    assert P.labels(second.ground) == ["2", "4"]


def test_decompose_ideal_children_valid():
    spec = GeneratorSpec(seed=3, n=9, density=0.2, m=5, k=5, mode="exactly-dual")
    inst = gen_instance(spec)
    S = inst.ideals[0]
    inside, parts = decompose_ideal(inst, S)
    assert inside.ground == S
    assert len(parts) == len(set(F & S for F in inst.filters))
    for child in (inside, *parts):
        assert all(A & B for A in child.ideals for B in child.filters)
    fig = fig1_instance()
    with pytest.raises(PreconditionError):
        decompose_ideal(fig, fig.poset.mask(["3"]))


def test_decompose_filter_mirrors_ideal():
    inst = fig1_instance()
    P = inst.poset
    S = P.mask(["3", "4"])
    inside, parts = decompose_filter(inst, S)
    assert inside.ground == S
    assert [P.labels(x) for x in inside.filters] == []
    assert len(parts) == 2


# simple cases


def test_simple_trivial_pairs():
    P = fig1()
    inst = DualInstance(P, [P.mask(["1", "2"])], [])
    r = simple_dual(inst)
    assert not r.is_dual and r.witness == 0
    assert simple_dual(DualInstance(P, [0], [])).is_dual
    r = simple_dual(DualInstance(P, [], [P.mask(["3"])]))
    assert not r.is_dual and r.witness == P.full


def test_simple_single_ideal_figure1():
    inst = fig1_instance()
    P = inst.poset
    single = DualInstance(P, [P.mask(["2", "4"])], inst.filters)
    r = simple_dual(single)
    assert not r.is_dual
    assert P.labels(r.witness) == ["1", "2", "3"]
    assert verify_witness(single, r.witness)


def test_simple_dual_figure1_is_not_dual():
    # {2} contains neither ideal and meets the only filter
    inst = fig1_instance()
    r = simple_dual(inst)
    assert not r.is_dual
    assert inst.poset.labels(r.witness) == ["2"]


def test_simple_needs_small_family():
    inst = fig1_instance(filters=(("2", "3", "4"), ("1", "3", "4")))
    with pytest.raises(PreconditionError):
        simple_dual(inst)


# full engine


def test_figure1_engine_and_oracle_agree():
    inst = fig1_instance()
    r = check_dual(inst, debug=True)
    b = brute_force_dual(inst)
    assert r.is_dual == b.is_dual is False
    assert inst.poset.labels(r.witness) == ["2"]


def test_corrected_figure1_is_dual():
    inst = fig1_instance(filters=(("2", "3", "4"), ("1", "3", "4")))
    r = check_dual(inst, debug=True)
    assert r.is_dual
    assert r.stats.calls >= 3


def test_duplicated_root_goes_through_recursion():
    inst = fig1_instance()
    dup = DualInstance(inst.poset, inst.ideals * 2, inst.filters * 2)
    r = check_dual(dup, debug=True)
    assert r.stats.calls >= 2 and r.stats.max_depth >= 1
    assert not r.is_dual and verify_witness(inst, r.witness)


def test_empty_families():
    P = fig1()
    assert not check_dual(DualInstance(P, [], [])).is_dual
    assert check_dual(DualInstance(P, [0], [])).is_dual


def test_antichain_hypergraph_dual():
    # {12, 34} and its transversal family {13, 14, 23, 24}
    P = Poset.antichain(4)
    I = [0b0011, 0b1100]
    F = [0b0101, 0b1001, 0b0110, 0b1010]
    assert check_dual(DualInstance(P, I, F), debug=True).is_dual
    r = check_dual(DualInstance(P, I, F[:-1]), debug=True)
    assert not r.is_dual
    # the removed transversal {2,4} is the only gap; its complement is the witness
    assert to_set(r.witness) == {0, 2}


def test_trace_events():
    events = []
    inst = gen_instance(GeneratorSpec(seed=7, n=12, density=0.15, m=8, k=8,
                                      mode="exactly-dual"))
    r = check_dual(inst, trace=events.append)
    assert len(events) == r.stats.calls
    assert events[0].depth == 0 and events[0].volume == inst.volume
    for ev in events:
        assert "v=" in ev.format() and f"branch={ev.branch}" in ev.format()
        for cv in ev.child_volumes:
            assert cv <= ev.volume


def test_complement_duality_all_subsets():
    # a family and the complements of its maximal avoiding ideals are dual;
    # checked over every subset of a small poset
    P = Poset.from_edges(5, [(0, 2), (1, 2), (2, 4)])
    ideals = list(enumerate_ideals(P))
    for X in ideals:
        inst = DualInstance(P, [X], [P.full & ~Y for Y in ideals
                                     if X & ~Y and all(
                                         X & ~Z for Z in ideals
                                         if Z != Y and Y & ~Z == 0)])
        assert check_dual(inst, debug=True).is_dual == brute_force_dual(inst).is_dual


@st.composite
def instances(draw):
    n = draw(st.integers(1, 7))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if draw(st.booleans()) and draw(st.booleans())]
    P = Poset.from_edges(n, edges)
    ideals = list(enumerate_ideals(P))
    I = draw(st.lists(st.sampled_from(ideals), max_size=5))
    F = [P.full & ~X for X in draw(st.lists(st.sampled_from(ideals), max_size=5))]
    F = [f for f in F if all(f & i for i in I)]
    return n, edges, DualInstance(P, I, F)


@settings(max_examples=300, deadline=None)
@given(instances())
def test_engine_matches_naive_oracle(data):
    n, edges, inst = data
    leq = closure(n, edges)
    expect = naive_dual(n, leq, [to_set(i) for i in inst.ideals],
                        [to_set(f) for f in inst.filters])
    r = check_dual(inst, debug=True)
    assert r.is_dual == (expect is None)
    if not r.is_dual:
        assert verify_witness(inst, r.witness)
    assert r.stats.calls <= call_bound(inst.volume)


def test_mixed_random_against_bruteforce():
    for spec in mixed_specs(150, seed=11):
        inst = gen_instance(spec)
        r = check_dual(inst)
        assert r.is_dual == brute_force_dual(inst).is_dual, spec
        if not r.is_dual:
            assert verify_witness(inst, r.witness)


def test_parallel_matches_sequential():
    seen_parallel = False
    for seed in range(6):
        inst = gen_instance(GeneratorSpec(seed=seed, n=60, density=0.02, m=30,
                                          k=30))
        seq = check_dual(inst)
        par = check_dual(inst, workers=2)
        assert seq.is_dual == par.is_dual
        if not par.is_dual:
            assert verify_witness(inst, par.witness)
        seen_parallel |= inst.volume >= PARALLEL_MIN_VOLUME
    assert seen_parallel


def test_parallel_is_deterministic():
    inst = gen_instance(GeneratorSpec(seed=1, n=60, density=0.02, m=30, k=30))
    a = check_dual(inst, workers=2)
    b = check_dual(inst, workers=3)
    assert (a.is_dual, a.witness, a.stats.calls) == (b.is_dual, b.witness, b.stats.calls)

from pathlib import Path

import pytest

from posetdual.errors import DimensionError, ParseError
from posetdual.formats import (
    build_mining_input,
    build_property,
    dump_instance,
    load_instance,
    load_lattice,
    parse_implications,
    parse_instance,
    parse_lattice,
    parse_property,
    parse_transactions,
)
from posetdual.generators import GeneratorSpec, gen_instance
from posetdual.lattice import ProductLattice

FIX = Path(__file__).parent / "fixtures"


def test_figure1_file():
    inst = load_instance(FIX / "figure1.yaml").instance
    P = inst.poset
    assert P.names == ("1", "2", "3", "4")
    assert P.leq(P.index("2"), P.index("4"))
    assert [P.labels(I) for I in inst.ideals] == [["1", "2"], ["2", "4"]]
    assert [P.labels(F) for F in inst.filters] == [["2", "3", "4"]]


def test_integer_ids_without_names():
    inst = parse_instance("n: 3\nedges: [[0, 1]]\nideals: [[0]]\nfilters: [[0, 1, 2]]\n").instance
    assert inst.poset.n == 3 and inst.ideals == (1,)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as e:
        load_instance(FIX / "bad_filter.yaml")
    assert e.value.line == 6 and "bad_filter.yaml:6" in str(e.value)
    with pytest.raises(ParseError) as e:
        parse_instance("names: [a, b]\nedges:\n  - [a, c]\n")
    assert e.value.line == 3
    with pytest.raises(ParseError) as e:
        parse_instance("n: 2\nideals: [[0]]\nfilters: [[1]]\n")
    assert e.value.line == 3 and "disjoint" in str(e.value)
    with pytest.raises(ParseError):
        parse_instance("n: 2\nedges: [[0, 1], [1, 0]]\n")
    with pytest.raises(ParseError):
        parse_instance("n: [1\n")
    with pytest.raises(ParseError):
        parse_instance("n: 2\nbogus: 1\n")
    with pytest.raises(ParseError):
        parse_instance("- 1\n")


def test_missing_file():
    with pytest.raises(ParseError):
        load_instance(FIX / "nope.yaml")


def test_dump_roundtrip():
    for seed in range(10):
        inst = gen_instance(GeneratorSpec(seed, 8, 0.2, 4, 4))
        back = parse_instance(dump_instance(inst)).instance
        assert back.poset == inst.poset
        assert set(back.ideals) == set(inst.ideals)
        assert set(back.filters) == set(inst.filters)
    fig = load_instance(FIX / "figure1.yaml").instance
    assert parse_instance(dump_instance(fig)).instance.poset == fig.poset


def test_lattice_files():
    lf = load_lattice(FIX / "figure1_lattice.yaml")
    assert len(lf.lattice) == 8
    assert [lf.lattice.label(a) for a in lf.A] == ["12", "24"]
    lf = load_lattice(FIX / "chains.yaml")
    assert isinstance(lf.lattice, ProductLattice)
    assert lf.A == [(1, 0), (0, 2)] and lf.B == [(0, 1)]
    with pytest.raises(ParseError) as e:
        parse_lattice("factors:\n  - n: 2\n    leq: [[0, 1]]\nA:\n  - [1, 1]\n")
    assert e.value.line == 5


def test_transactions_and_comments():
    rows = parse_transactions("# header\na b  # trailing\n\n-\nc\n")
    assert rows == [["a", "b"], [], ["c"]]


def test_implications():
    rules = parse_implications("# rules\nButter -> Bread\nCheese -> Bread Milk\n")
    assert rules == [(["Butter"], "Bread", 2), (["Cheese"], "Bread", 3),
                     (["Cheese"], "Milk", 3)]
    with pytest.raises(DimensionError) as e:
        parse_implications("a -> b\na b -> c\n", "r.txt")
    assert "r.txt:2" in str(e.value)
    with pytest.raises(ParseError):
        parse_implications("a b\n")
    with pytest.raises(ParseError):
        parse_implications("-> b\n")


def test_attributes_sorted_and_rows_encoded():
    mi = build_mining_input([["Milk", "Bread"]], [(["Butter"], "Bread", 1)])
    assert mi.base.attributes == ("Bread", "Butter", "Milk")
    assert mi.rows == [0b101]


def test_property_file():
    text = """
inequalities:
  - {kind: infrequent, t: 1}
  - {kind: linear, weights: {a: 2, b: 1}, threshold: 2}
  - kind: hypergraph
    edges: [[a, b], [c]]
    weights: [1, 3]
    threshold: 3
"""
    specs = parse_property(text)
    assert [s["kind"] for s in specs] == ["infrequent", "linear", "hypergraph"]
    mi = build_mining_input([["a", "b"], ["c"]], [])
    pi = build_property(specs, mi.base, mi.rows)
    assert len(pi.inequalities) == 3
    assert pi(mi.base.mask(["a", "c"]))
    assert not pi(mi.base.mask(["b", "c"]))
    with pytest.raises(ParseError) as e:
        parse_property("inequalities:\n  - {kind: magic}\n")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        parse_property("inequalities:\n  - {kind: hypergraph, edges: [[a]], weights: [1, 2]}\n")

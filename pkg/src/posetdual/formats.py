"""Readers for instance, lattice, transaction, implication and property files.

Instance, lattice and property files are YAML documents (so ``#`` comments
work everywhere).  Element references are names when a ``names`` list is
present and integer ids otherwise.  Transactions and implications are plain
line-oriented text.

Instance file::

    n: 4                      # optional when names is given
    names: [1, 2, 3, 4]       # optional
    edges: [[1, 3], [2, 3]]   # a <= b
    ideals: [[1, 2], [2, 4]]
    filters: [[2, 3, 4]]

Lattice file (single lattice)::

    elements: [0, a, b, ab]   # or n: 4
    leq: [[0, a], [0, b], [a, ab], [b, ab]]
    A: [ab]
    B: [a]

Lattice file (product)::

    factors:
      - n: 2
        leq: [[0, 1]]
      - elements: [x, y, z]
        leq: [[x, y], [y, z]]
    A: [[1, y]]
    B: [[0, z]]

Transactions: one row per line, whitespace separated attribute names; a lone
``-`` is an empty row.  Implications: ``a -> b`` per line (several
conclusions ``a -> b c`` expand to one rule each).

Property file::

    inequalities:
      - {kind: infrequent, t: 3}
      - {kind: row-cover, t: 2}
      - {kind: linear, weights: {Bread: 1, Milk: 2}, threshold: 2}
      - {kind: hypergraph, edges: [[Bread, Milk], [Cheese]], weights: [1, 2], threshold: 1}
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import DimensionError, ParseError
from .lattice import ExplicitLattice, ProductLattice
from .mining import (
    ImplicationBase,
    MonotoneProperty,
    TransversalInequality,
    property_infrequent,
    property_row_cover,
)
from .poset import DualInstance, Poset, to_mask, validate_instance

PROPERTY_KINDS = ("infrequent", "row-cover", "linear", "hypergraph")


class _Doc:
    """YAML node tree with line-aware conversion helpers."""

    def __init__(self, text: str, path=None):
        self.path = path
        try:
            self.root = yaml.compose(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                             line, path) from None
        if self.root is None:
            raise ParseError("empty document", None, path)
        if not isinstance(self.root, yaml.MappingNode):
            raise ParseError("top level must be a mapping", self.line(self.root), path)

    @staticmethod
    def line(node) -> int:
        return node.start_mark.line + 1

    def error(self, message, node):
        return ParseError(message, self.line(node) if node is not None else None,
                          self.path)

    def fields(self, node=None) -> dict:
        node = node if node is not None else self.root
        if not isinstance(node, yaml.MappingNode):
            raise self.error("expected a mapping", node)
        out = {}
        for key, value in node.value:
            out[str(key.value)] = value
        return out

    def seq(self, node) -> list:
        if not isinstance(node, yaml.SequenceNode):
            raise self.error("expected a list", node)
        return list(node.value)

    def scalar(self, node) -> str:
        if not isinstance(node, yaml.ScalarNode):
            raise self.error("expected a single value", node)
        return str(node.value)

    def integer(self, node) -> int:
        text = self.scalar(node)
        try:
            return int(text)
        except ValueError:
            raise self.error(f"expected an integer, got {text!r}", node) from None

    def number(self, node) -> float:
        text = self.scalar(node)
        try:
            return float(text)
        except ValueError:
            raise self.error(f"expected a number, got {text!r}", node) from None


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", None, path) from None


class _Resolver:
    def __init__(self, doc: _Doc, n: int, names):
        self.doc, self.n, self.names = doc, n, names
        self.index = {name: i for i, name in enumerate(names)} if names else None

    def __call__(self, node) -> int:
        token = self.doc.scalar(node)
        if self.index is not None:
            if token not in self.index:
                raise self.doc.error(f"unknown element {token!r}", node)
            return self.index[token]
        try:
            i = int(token)
        except ValueError:
            raise self.doc.error(
                f"element {token!r} is not an id and no names are declared",
                node) from None
        if not 0 <= i < self.n:
            raise self.doc.error(f"element id {i} out of range 0..{self.n - 1}", node)
        return i


def _names_and_size(doc, f, count_key, names_key):
    names = None
    if names_key in f:
        names = [doc.scalar(x) for x in doc.seq(f[names_key])]
        if len(set(names)) != len(names):
            raise doc.error("duplicate names", f[names_key])
    if count_key in f:
        n = doc.integer(f[count_key])
        if names is not None and n != len(names):
            raise doc.error(f"{count_key}={n} but {len(names)} names given",
                            f[count_key])
    elif names is not None:
        n = len(names)
    else:
        raise doc.error(f"need `{count_key}` or `{names_key}`", doc.root)
    return n, names


def _pairs(doc, node, resolve):
    out = []
    for item in doc.seq(node):
        pair = doc.seq(item)
        if len(pair) != 2:
            raise doc.error("expected a pair [a, b]", item)
        out.append((resolve(pair[0]), resolve(pair[1])))
    return out


@dataclass
class InstanceFile:
    instance: DualInstance
    raw_ideals: list[int]
    raw_filters: list[int]


def parse_instance(text: str, path=None, validate: bool = True) -> InstanceFile:
    doc = _Doc(text, path)
    f = doc.fields()
    unknown = set(f) - {"n", "names", "edges", "ideals", "filters"}
    if unknown:
        raise doc.error(f"unknown field(s) {sorted(unknown)}", f[sorted(unknown)[0]])
    n, names = _names_and_size(doc, f, "n", "names")
    if n < 1:
        raise doc.error("the poset must have at least one element", f.get("n"))
    resolve = _Resolver(doc, n, names)
    edges = _pairs(doc, f["edges"], resolve) if "edges" in f else []
    try:
        P = Poset.from_edges(n, edges, names)
    except ValueError as exc:
        raise doc.error(str(exc), f.get("edges")) from None

    def family(key):
        if key not in f:
            return [], []
        out, nodes = [], []
        for item in doc.seq(f[key]):
            out.append(to_mask(resolve(x) for x in doc.seq(item)))
            nodes.append(item)
        return out, nodes

    ideals, inodes = family("ideals")
    filters, fnodes = family("filters")
    if not validate:
        return InstanceFile(DualInstance(P, ideals, filters), ideals, filters)
    from .poset import is_filter, is_ideal
    for I, node in zip(ideals, inodes):
        if not is_ideal(P, I):
            raise doc.error(f"{P.labels(I)} is not an ideal", node)
    for F, node in zip(filters, fnodes):
        if not is_filter(P, F):
            raise doc.error(f"{P.labels(F)} is not a filter", node)
    for I, inode in zip(ideals, inodes):
        for F, fnode in zip(filters, fnodes):
            if not I & F:
                raise doc.error(
                    f"ideal {P.labels(I)} (line {doc.line(inode)}) and filter "
                    f"{P.labels(F)} are disjoint", fnode)
    return InstanceFile(validate_instance(P, ideals, filters), ideals, filters)


def load_instance(path, validate: bool = True) -> InstanceFile:
    return parse_instance(_read(path), str(path), validate)


def dump_instance(inst: DualInstance) -> str:
    """YAML text that :func:`parse_instance` reads back to the same instance."""
    P = inst.poset
    doc = {}
    if P.names is not None:
        doc["names"] = list(P.names)
    else:
        doc["n"] = P.n
    doc["edges"] = [[P.label(a), P.label(b)] if P.names else [a, b]
                    for a, b in P.cover_pairs()]

    def family(fam):
        return [P.labels(X) if P.names else [int(x) for x in P.labels(X)]
                for X in fam]

    doc["ideals"] = family(inst.ideals)
    doc["filters"] = family(inst.filters)
    return yaml.safe_dump(doc, default_flow_style=None, sort_keys=False)


@dataclass
class LatticeFile:
    lattice: ExplicitLattice | ProductLattice
    A: list
    B: list


def _explicit_lattice(doc, f) -> ExplicitLattice:
    n, names = _names_and_size(doc, f, "n", "elements")
    resolve = _Resolver(doc, n, names)
    pairs = _pairs(doc, f["leq"], resolve) if "leq" in f else []
    try:
        return ExplicitLattice(n, pairs, names)
    except ValueError as exc:
        raise doc.error(str(exc), f.get("leq", doc.root)) from None


def parse_lattice(text: str, path=None) -> LatticeFile:
    doc = _Doc(text, path)
    f = doc.fields()
    if "factors" in f:
        factors = []
        for node in doc.seq(f["factors"]):
            factors.append(_explicit_lattice(doc, doc.fields(node)))
        L = ProductLattice(factors)

        def element(node):
            coords = doc.seq(node)
            if len(coords) != len(factors):
                raise doc.error(f"expected {len(factors)} coordinates", node)
            out = []
            for fac, c in zip(factors, coords):
                token = doc.scalar(c)
                try:
                    out.append(fac.index(token if fac.names else int(token)))
                except (IndexError, ValueError):
                    raise doc.error(f"unknown element {token!r}", c) from None
            return tuple(out)
    else:
        L = _explicit_lattice(doc, f)
        resolve = _Resolver(doc, L.n, L.names)
        element = resolve
    A = [element(x) for x in doc.seq(f["A"])] if "A" in f else []
    B = [element(x) for x in doc.seq(f["B"])] if "B" in f else []
    return LatticeFile(L, A, B)


def load_lattice(path) -> LatticeFile:
    return parse_lattice(_read(path), str(path))


def _lines(text):
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def parse_transactions(text: str, path=None) -> list[list[str]]:
    rows = []
    for _, line in _lines(text):
        tokens = line.split()
        rows.append([] if tokens == ["-"] else tokens)
    return rows


def parse_implications(text: str, path=None) -> list[tuple[list[str], str, int]]:
    """Rules as ``(premise_tokens, conclusion, line_number)``."""
    rules = []
    for number, line in _lines(text):
        if "->" not in line:
            raise ParseError("expected `a -> b`", number, path)
        left, right = line.split("->", 1)
        premise, conclusions = left.split(), right.split()
        if not conclusions:
            raise ParseError("missing conclusion", number, path)
        if len(premise) >= 2:
            raise DimensionError(
                f"{path or '<input>'}:{number}: premise {premise} has "
                f"{len(premise)} attributes; only single-attribute premises are "
                "supported (minimal infrequent closed sets of bases with "
                "two-attribute premises cannot be enumerated in output "
                "polynomial time unless P=NP)")
        if not premise:
            raise ParseError("empty premise", number, path)
        for c in conclusions:
            rules.append((premise, c, number))
    return rules


def parse_property(text: str, path=None) -> list[dict]:
    """Inequality specs as dicts; attribute names stay unresolved."""
    doc = _Doc(text, path)
    f = doc.fields()
    if "inequalities" not in f:
        raise doc.error("missing `inequalities`", doc.root)
    out = []
    for node in doc.seq(f["inequalities"]):
        g = doc.fields(node)
        if "kind" not in g:
            raise doc.error("inequality without `kind`", node)
        kind = doc.scalar(g["kind"])
        if kind not in PROPERTY_KINDS:
            raise doc.error(f"kind must be one of {PROPERTY_KINDS}", g["kind"])
        spec = {"kind": kind, "line": doc.line(node)}
        if kind in ("infrequent", "row-cover"):
            if "t" not in g:
                raise doc.error(f"{kind} needs `t`", node)
            spec["t"] = doc.integer(g["t"])
        elif kind == "linear":
            weights = doc.fields(g["weights"]) if "weights" in g else {}
            spec["weights"] = {k: doc.number(v) for k, v in weights.items()}
            spec["threshold"] = doc.number(g["threshold"]) if "threshold" in g else 0.0
        else:
            edges = [[doc.scalar(a) for a in doc.seq(e)]
                     for e in doc.seq(g["edges"])] if "edges" in g else []
            weights = ([doc.number(w) for w in doc.seq(g["weights"])]
                       if "weights" in g else [1.0] * len(edges))
            if len(weights) != len(edges):
                raise doc.error("one weight per hyperedge", g["weights"])
            spec["edges"] = edges
            spec["weights"] = weights
            spec["threshold"] = doc.number(g["threshold"]) if "threshold" in g else 0.0
        out.append(spec)
    return out


def property_attributes(specs) -> set[str]:
    names = set()
    for s in specs:
        if s["kind"] == "linear":
            names.update(s["weights"])
        elif s["kind"] == "hypergraph":
            for e in s["edges"]:
                names.update(e)
    return names


def build_property(specs, base: ImplicationBase, rows: list[int]) -> MonotoneProperty:
    ineqs = []
    n = base.n
    for s in specs:
        if s["kind"] == "infrequent":
            ineqs.extend(property_infrequent(rows, s["t"], n).inequalities)
        elif s["kind"] == "row-cover":
            ineqs.extend(property_row_cover(rows, s["t"]).inequalities)
        elif s["kind"] == "linear":
            w = [0.0] * n
            for name, value in s["weights"].items():
                w[base.attributes.index(name)] = value
            ineqs.append(TransversalInequality(
                tuple(1 << a for a in range(n)), tuple(w), s["threshold"]))
        else:
            ineqs.append(TransversalInequality(
                tuple(base.mask(e) for e in s["edges"]), tuple(s["weights"]),
                s["threshold"]))
    return MonotoneProperty(tuple(ineqs))


@dataclass
class MiningInput:
    base: ImplicationBase
    rows: list[int]


def build_mining_input(transactions: list[list[str]], rules,
                       extra_attributes=()) -> MiningInput:
    """Attribute ids follow sorted attribute names."""
    names = set(extra_attributes)
    for row in transactions:
        names.update(row)
    for premise, c, _ in rules:
        names.update(premise)
        names.add(c)
    attributes = tuple(sorted(names))
    seen = set()
    pairs = []
    for premise, c, _ in rules:
        key = (tuple(premise), c)
        if key in seen or premise == [c]:
            continue
        seen.add(key)
        pairs.append((premise, c))
    base = ImplicationBase.from_names(attributes, pairs)
    rows = [base.mask(row) for row in transactions]
    return MiningInput(base, rows)

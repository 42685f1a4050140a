"""Command-line interface: ``posetdual {dual,lattice-dual,mine,oracle,bench}``.

Exit codes: 0 for a dual pair or a complete enumeration, 2 when a witness is
printed or enumeration stops early at ``--max-count``, 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .engine import call_bound, check_dual, chi
from .errors import DualizationError
from .formats import (
    PROPERTY_KINDS,
    build_mining_input,
    build_property,
    load_instance,
    load_lattice,
    parse_implications,
    parse_property,
    parse_transactions,
    property_attributes,
)
from .generators import MODES, GeneratorSpec, gen_instance
from .lattice import lattice_dual, lattice_dual_bruteforce, lattice_witness_ok
from .mining import ClosureLattice, MonotoneProperty, enumerate_all
from .poset import brute_force_dual, verify_witness

EXIT_OK, EXIT_ERROR, EXIT_FOUND = 0, 1, 2
EMPTY = "∅"
MINING_ORACLE_MAX = 20


class OracleMismatch(DualizationError):
    pass


@dataclass
class RunReport:
    command: str
    verdict: str
    result: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    oracle: str | None = None
    wall_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, ensure_ascii=False)


def digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def format_set(labels) -> str:
    labels = list(labels)
    return " ".join(labels) if labels else EMPTY


def _workers(args) -> int:
    if getattr(args, "seq", False):
        return 1
    return args.jobs or os.cpu_count() or 1


def _engine_stats(res, volume) -> dict:
    s = res.stats
    out = {"calls": s.calls, "max_depth": s.max_depth, "volume": volume,
           "branches": dict(sorted(s.branches.items()))}
    if volume >= 1:
        out["chi_v"] = chi(volume)
        out["bound"] = call_bound(volume)
    return out


def _emit(args, report: RunReport, lines):
    if args.json:
        print(report.to_json())
        return
    for line in lines:
        print(line)
    st = report.stats
    if st:
        parts = [f"{k}={v}" for k, v in st.items() if not isinstance(v, dict)]
        print(" ".join(parts) + f" wall={report.wall_seconds:.6f}s", file=sys.stderr)


def cmd_dual(args, brute: bool = False) -> int:
    t0 = time.perf_counter()
    inst = load_instance(args.instance).instance
    P = inst.poset

    trace = None
    if getattr(args, "trace", False):
        def trace(ev):
            print("trace " + ev.format(), file=sys.stderr)

    if brute:
        res = brute_force_dual(inst)
    else:
        res = check_dual(inst, trace=trace, workers=_workers(args))
    oracle = None
    if getattr(args, "oracle", False) and not brute:
        ref = brute_force_dual(inst)
        if ref.is_dual != res.is_dual:
            raise OracleMismatch(
                f"oracle disagrees: engine says {res.verdict}, brute force says "
                f"{ref.verdict}")
        if not res.is_dual and not verify_witness(inst, res.witness):
            raise OracleMismatch("engine witness fails verification")
        oracle = "agreed"

    report = RunReport("oracle" if brute else "dual", res.verdict,
                       inputs={str(args.instance): digest(args.instance)},
                       oracle=oracle)
    lines = [res.verdict]
    if not res.is_dual:
        labels = P.labels(res.witness)
        report.result = {"witness": labels}
        lines.append("witness: " + format_set(labels))
    report.stats = _engine_stats(res, inst.volume) if not brute else {
        "volume": inst.volume}
    if oracle:
        lines.append("oracle: " + oracle)
    report.wall_seconds = time.perf_counter() - t0
    _emit(args, report, lines)
    return EXIT_OK if res.is_dual else EXIT_FOUND


def cmd_lattice_dual(args) -> int:
    t0 = time.perf_counter()
    lf = load_lattice(args.lattice)
    L = lf.lattice
    res = lattice_dual(L, lf.A, lf.B, workers=_workers(args))
    oracle = None
    if args.oracle:
        ref = lattice_dual_bruteforce(L, lf.A, lf.B)
        if (ref is None) != res.is_dual:
            raise OracleMismatch("oracle disagrees with the engine")
        if not res.is_dual and not lattice_witness_ok(L, lf.A, lf.B, res.witness):
            raise OracleMismatch("engine witness fails verification")
        oracle = "agreed"
    report = RunReport("lattice-dual", res.verdict,
                       inputs={str(args.lattice): digest(args.lattice)},
                       oracle=oracle)
    lines = [res.verdict]
    if not res.is_dual:
        label = L.label(res.witness)
        report.result = {"witness": label}
        lines.append("witness: " + label)
    report.stats = _engine_stats(res.result, res.instance.volume)
    report.stats["irreducibles"] = res.instance.poset.n
    if oracle:
        lines.append("oracle: " + oracle)
    report.wall_seconds = time.perf_counter() - t0
    _emit(args, report, lines)
    return EXIT_OK if res.is_dual else EXIT_FOUND


def _mining_property(args, base, rows):
    if args.property_file:
        with open(args.property_file) as fh:
            specs = parse_property(fh.read(), args.property_file)
        return build_property(specs, base, rows)
    kind = args.property
    if kind in ("infrequent", "row-cover"):
        if args.t is None:
            raise DualizationError(f"--property {kind} needs --t")
        if not 0 <= args.t <= len(rows):
            raise DualizationError(f"--t must lie in 0..{len(rows)}")
        specs = [{"kind": kind, "t": args.t}]
    else:
        weights = {a: 1.0 for a in base.attributes}
        specs = [{"kind": "linear", "weights": weights, "threshold": args.threshold}]
    return build_property(specs, base, rows)


def brute_force_minimal(lat: ClosureLattice, pi) -> list[int]:
    good = [X for X in lat.closed_sets() if pi(X)]
    return sorted(X for X in good if not any(Y != X and Y & ~X == 0 for Y in good))


def cmd_mine(args) -> int:
    t0 = time.perf_counter()
    with open(args.transactions) as fh:
        transactions = parse_transactions(fh.read(), args.transactions)
    with open(args.implications) as fh:
        rules = parse_implications(fh.read(), args.implications)
    extra = ()
    if args.property_file:
        with open(args.property_file) as fh:
            extra = property_attributes(parse_property(fh.read(), args.property_file))
    mi = build_mining_input(transactions, rules, extra)
    base = mi.base
    lat = ClosureLattice(base)
    pi = _mining_property(args, base, mi.rows)

    found = []
    rounds = []
    for X in enumerate_all(lat, pi, on_step=lambda r: rounds.append(r.rounds),
                           workers=_workers(args)):
        found.append(X)
        if not args.json:
            print(format_set(base.names(X)), flush=True)
        if args.max_count is not None and len(found) >= args.max_count:
            break
    complete = args.max_count is None or len(found) < args.max_count
    oracle = None
    if args.oracle:
        if base.n > MINING_ORACLE_MAX:
            raise DualizationError(
                f"--oracle needs at most {MINING_ORACLE_MAX} attributes")
        expected = brute_force_minimal(lat, pi)
        if complete and sorted(found) != expected:
            raise OracleMismatch("enumeration differs from brute force")
        if not set(found) <= set(expected):
            raise OracleMismatch("a reported set is not a minimal satisfying closed set")
        oracle = "agreed"
        if not args.json:
            print("oracle: agreed")

    verdict = "COMPLETE" if complete else "STOPPED"
    report = RunReport(
        "mine", verdict,
        result={"sets": [base.names(X) for X in found]},
        stats={"count": len(found), "attributes": base.n,
               "hyperedges": pi.hyperedge_count if isinstance(pi, MonotoneProperty) else None,
               "max_rounds": max(rounds, default=0)},
        inputs={str(p): digest(p) for p in
                (args.transactions, args.implications, args.property_file) if p},
        oracle=oracle,
        wall_seconds=time.perf_counter() - t0,
    )
    _emit(args, report, [])
    return EXIT_OK if complete else EXIT_FOUND


BENCH_COLUMNS = ("instance_id", "n", "m", "k", "v", "chi_v", "calls", "bound",
                 "margin", "verdict", "micros")


def bench_rows(spec: GeneratorSpec, count: int, workers: int = 1):
    """One CSV record per generated instance; seeds run ``spec.seed + i``."""
    for i in range(count):
        s = GeneratorSpec(spec.seed + i, spec.n, spec.density, spec.m, spec.k,
                          spec.mode)
        inst = gen_instance(s)
        t0 = time.perf_counter()
        res = check_dual(inst, workers=workers)
        micros = int((time.perf_counter() - t0) * 1e6)
        v = inst.volume
        bound = call_bound(v)
        yield {
            "instance_id": i, "n": s.n, "m": len(inst.ideals),
            "k": len(inst.filters), "v": v,
            "chi_v": f"{chi(v):.9f}" if v >= 1 else "",
            "calls": res.stats.calls, "bound": f"{bound:.6g}",
            "margin": f"{bound - res.stats.calls:.6g}",
            "verdict": res.verdict, "micros": micros,
        }


def cmd_bench(args) -> int:
    if args.n < 1:
        raise DualizationError("--n must be at least 1: the empty poset has no instances")
    spec = GeneratorSpec(args.seed, args.n, args.density, args.m, args.k, args.mode)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    violations = 0
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in bench_rows(spec, args.count, _workers(args)):
            if float(row["margin"]) < 0:
                violations += 1
            writer.writerow(row)
    finally:
        if args.out:
            out.close()
    print(f"instances={args.count} bound_violations={violations}", file=sys.stderr)
    return EXIT_ERROR if violations else EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with every other failure; 2 means "found"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="posetdual",
        description="Dualization of ideal/filter families over posets and "
                    "distributive lattices, and minimal closed set mining.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, parallel=True):
        p.add_argument("--json", action="store_true", help="print a JSON report")
        if parallel:
            p.add_argument("--seq", action="store_true",
                           help="sequential evaluation (deterministic short-circuit stats)")
            p.add_argument("--jobs", type=int, default=None,
                           help="worker processes (default: CPU count)")

    p = sub.add_parser("dual", help="decide duality of an instance file")
    p.add_argument("instance")
    p.add_argument("--oracle", action="store_true", help="cross-check by brute force")
    p.add_argument("--trace", action="store_true", help="per-call log on stderr")
    common(p)

    p = sub.add_parser("oracle", help="brute-force duality check")
    p.add_argument("instance")
    common(p, parallel=False)

    p = sub.add_parser("lattice-dual", help="decide duality of lattice antichains")
    p.add_argument("lattice")
    p.add_argument("--oracle", action="store_true")
    common(p)

    p = sub.add_parser("mine", help="enumerate minimal closed sets with a property")
    p.add_argument("transactions")
    p.add_argument("implications")
    p.add_argument("--t", type=int, default=None, help="support threshold")
    p.add_argument("--property", choices=PROPERTY_KINDS[:3], default="infrequent")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="threshold for --property linear (unit weights)")
    p.add_argument("--property-file", default=None)
    p.add_argument("--max-count", type=int, default=None)
    p.add_argument("--oracle", action="store_true")
    common(p)

    p = sub.add_parser("bench", help="random instances; CSV of calls vs bound")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--density", type=float, default=0.02)
    p.add_argument("--mode", choices=MODES, default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--seq", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    return parser


def _validate(args):
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        raise DualizationError("--jobs must be positive")
    if args.command == "mine":
        if args.max_count is not None and args.max_count < 1:
            raise DualizationError("--max-count must be positive")
        if args.property_file and args.t is not None:
            raise DualizationError("--t and --property-file are exclusive")
    if args.command == "bench" and args.count < 0:
        raise DualizationError("--count must be non-negative")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "dual": cmd_dual,
        "oracle": lambda a: cmd_dual(a, brute=True),
        "lattice-dual": cmd_lattice_dual,
        "mine": cmd_mine,
        "bench": cmd_bench,
    }
    try:
        _validate(args)
        return handlers[args.command](args)
    except (DualizationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

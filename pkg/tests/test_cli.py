import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from posetdual.cli import main
from posetdual.formats import build_mining_input, load_instance, parse_implications
from posetdual.formats import parse_transactions
from posetdual.mining import ClosureLattice
from posetdual.poset import verify_witness

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_dual_figure1_prints_witness(capsys):
    code, out, err = run(capsys, "dual", FIX / "figure1.yaml", "--seq")
    assert code == 2
    lines = out.splitlines()
    assert lines[0] == "NOT_DUAL"
    # round trip: the printed names re-verify through the library
    inst = load_instance(FIX / "figure1.yaml").instance
    names = lines[1].removeprefix("witness: ").split()
    assert verify_witness(inst, inst.poset.mask(names))
    assert "calls=" in err


def test_dual_corrected_figure1(capsys):
    code, out, _ = run(capsys, "dual", FIX / "figure1_dual.yaml", "--oracle")
    assert code == 0
    assert out.splitlines() == ["DUAL", "oracle: agreed"]


def test_no_filters_gives_empty_witness(capsys):
    code, out, _ = run(capsys, "dual", FIX / "figure1_nofilters.yaml")
    assert code == 2 and "witness: ∅" in out


def test_json_report_is_stable(capsys):
    reports = []
    for _ in range(2):
        code, out, _ = run(capsys, "dual", FIX / "figure1_dual.yaml", "--json", "--seq")
        rep = json.loads(out)
        rep.pop("wall_seconds")
        reports.append(rep)
    assert reports[0] == reports[1]
    rep = reports[0]
    assert rep["verdict"] == "DUAL" and rep["stats"]["calls"] >= 1
    assert rep["stats"]["chi_v"] == pytest.approx(3.1192209, abs=1e-6)
    assert len(next(iter(rep["inputs"].values()))) == 64


def test_trace(capsys):
    code, out, err = run(capsys, "dual", FIX / "figure1_dual.yaml", "--trace")
    trace = [l for l in err.splitlines() if l.startswith("trace ")]
    assert trace and trace[0].startswith("trace depth=0 v=4")


def test_parse_error_exit_code(capsys):
    code, out, err = run(capsys, "dual", FIX / "bad_filter.yaml")
    assert code == 1 and "bad_filter.yaml:6" in err


def test_oracle_subcommand(capsys):
    code, out, _ = run(capsys, "oracle", FIX / "figure1.yaml")
    assert code == 2 and out.startswith("NOT_DUAL")


def test_lattice_dual(capsys):
    code, out, _ = run(capsys, "lattice-dual", FIX / "figure1_lattice.yaml", "--oracle")
    assert code == 2 and "witness: 2" in out and "oracle: agreed" in out
    code, out, _ = run(capsys, "lattice-dual", FIX / "chains.yaml")
    assert code == 0 and out.strip() == "DUAL"


def test_mine_fixture(capsys):
    code, out, _ = run(capsys, "mine", FIX / "fixture_db.txt", FIX / "figure2_rules.txt",
                       "--t", 3, "--oracle")
    assert code == 0
    assert out.splitlines() == ["Milk", "Bread Butter", "oracle: agreed"]
    # round trip through the library
    rows = parse_transactions((FIX / "fixture_db.txt").read_text())
    rules = parse_implications((FIX / "figure2_rules.txt").read_text())
    base = build_mining_input(rows, rules).base
    for line in out.splitlines()[:2]:
        assert ClosureLattice(base).is_closed(base.mask(line.split()))


def test_mine_extremes(capsys):
    db, rules = FIX / "fixture_db.txt", FIX / "figure2_rules.txt"
    assert run(capsys, "mine", db, rules, "--t", 5)[1] == "∅\n"
    assert run(capsys, "mine", db, rules, "--property", "linear")[1] == "∅\n"
    code, out, _ = run(capsys, "mine", db, rules, "--t", 3, "--max-count", 1)
    assert code == 2 and out == "Milk\n"


def test_mine_property_file(capsys):
    code, out, _ = run(capsys, "mine", FIX / "figure2_db.txt", FIX / "figure2_rules.txt",
                       "--property-file", FIX / "property.yaml")
    assert code == 0
    assert sorted(out.splitlines()) == ["Bread Butter", "Bread Milk"]


def test_mine_errors(capsys):
    db = FIX / "fixture_db.txt"
    code, _, err = run(capsys, "mine", db, FIX / "binary_rules.txt", "--t", 3)
    assert code == 1 and "binary_rules.txt:2" in err
    assert run(capsys, "mine", db, FIX / "figure2_rules.txt", "--t", 9)[0] == 1
    assert run(capsys, "mine", db, FIX / "figure2_rules.txt")[0] == 1


def test_bench_csv(capsys, tmp_path):
    args = ("bench", "--count", 20, "--n", 30, "--m", 10, "--k", 10, "--seed", 3, "--seq")
    code, out, err = run(capsys, *args)
    assert code == 0 and "bound_violations=0" in err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 20
    assert list(rows[0]) == ["instance_id", "n", "m", "k", "v", "chi_v", "calls",
                             "bound", "margin", "verdict", "micros"]
    assert all(int(r["calls"]) <= float(r["bound"]) for r in rows)
    # a second seed-pinned run differs only in timing
    again = list(csv.DictReader(io.StringIO(run(capsys, *args)[1])))
    strip = lambda rs: [{k: v for k, v in r.items() if k != "micros"} for r in rs]
    assert strip(rows) == strip(again)
    out_file = tmp_path / "b.csv"
    assert run(capsys, *args, "--out", out_file)[0] == 0
    assert len(out_file.read_text().splitlines()) == 21


def test_bench_rejects_empty_poset(capsys):
    code, _, err = run(capsys, "bench", "--n", 0)
    assert code == 1 and "at least 1" in err


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as e:
        main(["dual"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 1


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "posetdual.cli", "dual",
                           str(FIX / "figure1_dual.yaml")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("DUAL")

import csv
import io
import json

import pytest

from aspdecomp.cli import run

from conftest import EXAMPLE3_FACTS, R1


@pytest.fixture
def files(tmp_path):
    enc = tmp_path / "enc.lp"
    enc.write_text(R1 + "\n")
    inst = tmp_path / "inst.lp"
    inst.write_text(EXAMPLE3_FACTS.replace("5", "2") + "\n")
    facts = tmp_path / "facts.lp"
    facts.write_text("p(1).\np(2).\n")
    return tmp_path, enc, inst, facts


def test_ground_facts_only(files, capsys):
    _, _, _, facts = files
    assert run(["ground", "--decomposition", "off", str(facts)]) == 0
    assert capsys.readouterr().out == "p(1).\np(2).\n"


def test_ground_writes_report_and_log(files):
    tmp, enc, inst, _ = files
    out, rep, log = tmp / "out.lp", tmp / "report.json", tmp / "log.jsonl"
    assert run(["ground", str(enc), str(inst), "-o", str(out), "--report", str(rep), "--decision-log", str(log)]) == 0
    report = json.loads(rep.read_text())
    assert report["rules_in"] == 5
    decisions = [json.loads(line) for line in log.read_text().splitlines()]
    assert decisions and decisions[0]["rule"] == R1
    assert "p(2,2,2,2)." in out.read_text()


def test_ground_is_reproducible(files):
    tmp, enc, inst, _ = files
    texts = []
    for i in range(2):
        out, rep = tmp / f"o{i}.lp", tmp / f"r{i}.json"
        run(["ground", "--seed", "4", str(enc), str(inst), "-o", str(out), "--report", str(rep)])
        data = json.loads(rep.read_text())
        data.pop("wall_time_ms")
        texts.append((out.read_text(), data))
    assert texts[0] == texts[1]


def test_check_passes(files, capsys):
    _, enc, inst, _ = files
    assert run(["check", str(enc), str(inst)]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("PASS")


def test_rewrite_modes(files, capsys):
    _, enc, _, _ = files
    assert run(["rewrite", "--decomposition", "off", str(enc)]) == 0
    assert capsys.readouterr().out == R1 + "\n"
    assert run(["rewrite", "--decomposition", "always", str(enc)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_bench_chain(capsys):
    assert run(["bench", "--chain", "3", "--tuples", "20", "--domain", "8"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["mode"] for r in rows] == ["off", "always", "smart"]
    assert set(rows[0]) == {"problem", "instance", "mode", "grounded", "time_ms", "ground_rules",
                            "substitution_attempts"}
    attempts = {r["mode"]: int(r["substitution_attempts"]) for r in rows}
    assert attempts["smart"] <= attempts["off"]


def test_bench_timeout_row(capsys):
    assert run(["bench", "--chain", "8", "--modes", "off", "--timeout-ms", "20"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert row["grounded"] == "false"


def test_exit_codes(files, capsys):
    tmp, _, _, _ = files
    unsafe = tmp / "unsafe.lp"
    unsafe.write_text("p(X) :- q(Y).\n")
    broken = tmp / "broken.lp"
    broken.write_text("p(X :- q(X).\n")
    assert run(["ground", str(unsafe)]) == 2
    assert run(["ground", str(broken)]) == 2
    assert run(["ground", str(tmp / "missing.lp")]) == 1
    with pytest.raises(SystemExit) as exc:
        run(["ground", "--no-such-flag", str(unsafe)])
    assert exc.value.code == 1
    assert run(["bench"]) == 1
    assert run(["ground", "--ratio-threshold", "0", str(unsafe)]) == 1
    big = tmp / "big.lp"
    big.write_text("a(1..50).\n")
    assert run(["ground", "--max-ground-rules", "10", str(big)]) == 3


def test_explain_costs(files, capsys):
    _, enc, inst, _ = files
    run(["ground", "--explain-costs", "--decomposition", "off", str(enc), str(inst)])
    err = capsys.readouterr().err.strip().splitlines()
    record = json.loads(err[0])
    assert record["rule"] == R1 and len(record["steps"]) == 4

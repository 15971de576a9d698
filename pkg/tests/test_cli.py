import csv
import io
import json
import subprocess
import sys

import pytest

from classrank import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classgroup(capsys):
    code, out, _ = run(capsys, "classgroup", "--disc", "-23")
    assert code == 0 and "h=3" in out and "divisors=[3]" in out
    code, out, _ = run(capsys, "classgroup", "--disc", "-3")
    assert code == 0 and "h=1" in out
    code, out, _ = run(capsys, "classgroup", "--disc", "-11199", "--json")
    doc = json.loads(out)
    assert doc["elementary_divisors"] == [5, 20] and doc["p_ranks"]["5"] == 2


@pytest.mark.parametrize(
    "argv, code",
    [
        (["classgroup", "--disc", "5"], 2),
        (["classgroup", "--disc", "-5"], 2),
        (["classgroup", "--disc", "-10000003"], 3),
        (["scan", "--p", "4", "--q", "5", "--box", "1:2,1:2"], 2),
        (["scan", "--p", "5", "--q", "6", "--box", "1:2,1:2"], 2),
        (["scan", "--p", "5", "--q", "5", "--X", "1e6", "--box", "1:2,1:2"], 2),
        (["scan", "--p", "5", "--q", "5"], 2),
        (["scan", "--p", "5", "--q", "5", "--box", "3:1,1:2"], 2),
        (["density", "--p", "7", "--q", "5", "--L", "50"], 2),
        (["lemmas", "--p", "5", "--q", "3"], 2),
        (["nonsense"], 2),
        ([], 2),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_scan_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, err = run(capsys, "scan", "--p", "5", "--q", "5", "--box", "5:8,5:8", "--mode", "relaxed", "--out", str(out))
    assert code == 0 and "S1=" in err and "certified=" in err
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert "38713219" in {row["D"] for row in doc["rows"]}
    # verify replays the stored certificates
    code, vout, _ = run(capsys, "verify", str(out))
    assert code == 0 and "D=38713219: valid" in vout


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--p", "5", "--q", "5", "--box", "5:7,5:7", "--skip-diagonal", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert list(rows[0]) == ["D", "a", "b", "multiplicity", "squarefree_verdict", "certified"]
    assert {r["D"] for r in rows} == {"36733824", "38713219", "62319164"}


def test_strict_window_note(capsys):
    code, out, err = run(capsys, "scan", "--p", "5", "--X", "1e13", "--strict-window")
    assert code == 0
    assert "strict window is empty" in err
    doc = json.loads(out)
    assert doc["runs"][0]["q"] == 11
    assert any("strict window is empty" in n for n in doc["runs"][0]["report"]["notes"])


def test_campaign_output_is_reproducible(capsys):
    argv = ["scan", "--p", "5", "--X", "1e8", "1e10", "1e12", "--seed", "3"]
    code, first, err = run(capsys, *argv)
    assert code == 0 and err.count("X=") == 3 and "fitted exponent" in err
    _, second, _ = run(capsys, *argv, "--workers", "2")
    assert first == second
    doc = json.loads(first)
    assert [r["count"] for r in doc["runs"]] == sorted(r["count"] for r in doc["runs"])
    assert doc["growth_fit"]["target_exponent"] == 0.25


def test_no_partial_file_on_failure(tmp_path, capsys, monkeypatch):
    out = tmp_path / "never.json"

    def boom(*a, **k):
        raise cli.InternalConsistencyError("planted")

    monkeypatch.setattr(cli, "run_scan", boom)
    code, _, err = run(capsys, "scan", "--p", "5", "--q", "5", "--box", "1:3,1:3", "--out", str(out))
    assert code == 4 and "planted" in err
    assert not out.exists() and list(tmp_path.iterdir()) == []


def test_density_and_lemmas(capsys):
    code, out, _ = run(capsys, "density", "--p", "5", "--q", "7", "--L", "20")
    assert code == 0 and "partial_product (L=20)" in out
    value = float(out.split("partial_product (L=20) = ")[1].split("~ ")[1].split()[0])
    assert 0 < value <= 1
    code, out, _ = run(capsys, "lemmas", "--p", "5", "--q", "7", "--lmax", "50")
    assert code == 0 and out.strip() == "lemma31: PASS; lemma32: witness found for every ell <= 50"


def test_verify_detects_tampering(tmp_path, capsys):
    src = tmp_path / "r.json"
    run(capsys, "scan", "--p", "5", "--q", "3", "--box", "1:1,1:1", "--out", str(src))
    doc = json.loads(src.read_text())
    cert = doc["certificates"][0]
    (tmp_path / "c.json").write_text(json.dumps(cert))
    code, out, _ = run(capsys, "verify", str(tmp_path / "c.json"))
    assert code == 1 and "not a rank-2 certificate" in out
    assert run(capsys, "verify", "--allow-invalid", str(tmp_path / "c.json"))[0] == 0
    cert["transcript"][0][2] = not cert["transcript"][0][2]
    (tmp_path / "t.json").write_text(json.dumps(cert))
    assert run(capsys, "verify", str(tmp_path / "t.json"))[0] == 4
    (tmp_path / "bad.json").write_text("{}")
    assert run(capsys, "verify", str(tmp_path / "bad.json"))[0] == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "classrank", "classgroup", "--disc", "-23"], capture_output=True, text=True)
    assert res.returncode == 0 and "h=3" in res.stdout

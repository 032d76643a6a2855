import csv
import io
import json

import pytest

from younghull import cli, volumes
from younghull.r4closed import EH_CONSTANT_R4
from younghull.trigcurve import make_generalized_ellipse, save_curve


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_volume_human(capsys):
    code, out, _ = run(capsys, "volume", "--curve", "gen-ellipse:2", "--hull", "eh", "--grid", "256")
    assert code == 0
    assert "value: 2.40393604\n" in out  # nine significant digits
    assert "signed_raw" in out


def test_volume_machine_formats_keep_full_precision(capsys):
    code, out, _ = run(capsys, "volume", "--curve", "gen-ellipse:1", "--hull", "ch", "--grid", "512", "--format", "jsonl")
    rec = json.loads(out)
    assert code == 0 and rec["outputs"]["value"] == pytest.approx(3.141592653589793, rel=1e-15)
    assert list(rec) == sorted(rec) and rec["command"] == "volume"
    assert set(rec) == {"command", "inputs", "outputs", "timings", "versions"}
    code, out, _ = run(capsys, "volume", "--curve", "lissajoux:1,2", "--hull", "eh-closed", "--format", "csv")
    rows = dict(csv.reader(io.StringIO(out)))
    assert float(rows["value"]) == pytest.approx(EH_CONSTANT_R4, abs=1e-12)


def test_run_record_is_deterministic():
    argv = ["mc", "--curve", "gen-ellipse:2", "--hull", "eh", "--trials", "20000", "--seed", "7"]
    _, a = cli.run(argv)
    _, b = cli.run(argv + ["--threads", "2"])
    assert a.to_dict()["outputs"] == b.to_dict()["outputs"]
    a.timings = b.timings = {}
    a.inputs.pop("threads", None)
    assert a.to_json() == b.to_json()


def test_bad_input_exit_codes(capsys):
    assert run(capsys, "volume", "--curve", "nonsense")[0] == 2
    assert run(capsys, "volume", "--curve", "lissajoux:1,3", "--hull", "eh-closed")[0] == 2
    assert run(capsys, "member", "--curve", "gen-ellipse:2", "--point", "1,2")[0] == 2
    assert run(capsys, "member", "--curve", "gen-ellipse:2", "--point", "a,b,c,d")[0] == 2
    assert run(capsys, "volume", "--curve", "gen-ellipse:2", "--grid", "4")[0] == 2
    assert run(capsys, "ruling", "--curve", "gen-ellipse:2", "--diagram", "2,1")[0] == 2
    assert run(capsys, "mc", "--curve", "gen-ellipse:2", "--trials", "0")[0] == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["volume", "--curve", "gen-ellipse:2", "--hull", "bogus"])
    assert info.value.code == 2


def test_numeric_failure_exit_code(capsys, tmp_path):
    path = tmp_path / "flat.json"
    flat = {"half_dim": 2, "coords": [{"cos": [1]}, {"sin": [1]}, {}, {}]}
    path.write_text(json.dumps(flat))
    code, _, err = run(capsys, "volume", "--curve", str(path), "--hull", "eh", "--grid", "16")
    assert code == 3 and "numeric failure" in err
    code, _, _ = run(capsys, "gamma", "--curve", "lissajoux:1,3", "--point", "0,3.141592653589793")
    assert code == 3


def test_member_and_gamma(capsys):
    code, out, _ = run(capsys, "member", "--curve", "gen-ellipse:2", "--hull", "eh", "--point", "0,0,0,-2")
    assert code == 0 and "verdict: outside" in out
    code, out, _ = run(capsys, "member", "--curve", "gen-ellipse:2", "--hull", "ch", "--point", "0,0,0,0")
    assert "verdict: inside" in out
    code, out, _ = run(capsys, "member", "--curve", "gen-ellipse:2", "--hull", "yh", "--diagram", "1,1", "--point", "0,0,0,0", "--format", "jsonl")
    assert json.loads(out)["outputs"]["inside"] is True
    code, out, _ = run(capsys, "gamma", "--curve", "gen-ellipse:2", "--point", "0,3.141592653589793", "--format", "jsonl")
    pt = json.loads(out)["outputs"]["point"]
    assert pt[3] == pytest.approx(-1.5, abs=1e-12)


def test_skeleton_csv_row_count(capsys):
    code, out, _ = run(capsys, "skeleton", "--curve", "gen-ellipse:2", "--grid", "128", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["t1", "t2", "x1", "x2", "x3", "x4", "stratum"]
    assert len(rows) - 1 == 128 * 129 // 2


def test_skeleton_jsonl_and_out_file(capsys, tmp_path):
    target = tmp_path / "sk.jsonl"
    code, out, _ = run(capsys, "skeleton", "--curve", "gen-ellipse:2", "--grid-per-axis", "8", "--format", "jsonl", "--out", str(target))
    lines = target.read_text().splitlines()
    assert code == 0 and len(lines) == 36 and "rows: 36" in out
    first = json.loads(lines[0])
    assert first["stratum"] == "(2)" and set(first) == {"t1", "t2", "x1", "x2", "x3", "x4", "stratum"}


def test_ruling_and_nesting(capsys):
    code, out, _ = run(capsys, "ruling", "--curve", "gen-ellipse:2", "--grid", "8", "--rays", "2", "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 1 + 16
    code, out, _ = run(capsys, "nesting", "--curve", "gen-ellipse:2", "--trials", "1000", "--format", "jsonl")
    assert code == 0 and json.loads(out)["outputs"]["violations"] == 0


def test_length_and_iso(capsys, tmp_path):
    code, out, _ = run(capsys, "length", "--curve", "gen-ellipse:2", "--format", "jsonl")
    assert json.loads(out)["outputs"]["length"] == pytest.approx(8.885765876316732, rel=1e-14)
    code, out, _ = run(capsys, "iso", "--curve", "gen-ellipse:2", "--format", "jsonl")
    assert abs(json.loads(out)["outputs"]["ratio"] - 1) < 1e-6
    path = tmp_path / "e.json"
    save_curve(make_generalized_ellipse(2).transformed(scale=3.0), path)
    code, out, _ = run(capsys, "iso", "--curve", str(path), "--grid", "64", "--format", "jsonl")
    assert abs(json.loads(out)["outputs"]["ratio"] - 1) < 1e-6


def test_mc_ch_and_skeleton(capsys):
    code, out, _ = run(capsys, "mc", "--curve", "gen-ellipse:2", "--hull", "skeleton", "--grid-per-axis", "32", "--trials", "5000", "--format", "jsonl")
    rec = json.loads(out)
    assert code == 0 and rec["outputs"]["trials"] == 5000 and rec["outputs"]["hits"] > 0


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--only", "4,8")
    assert code == 0 and "[PASS] 4." in out and "[PASS] 8." in out
    assert run(capsys, "verify", "--only", "12")[0] == 2


def test_verify_detects_wrong_prefactor(capsys, monkeypatch):
    monkeypatch.setattr(volumes, "elliptic_prefactor", lambda n: 1.0 / (2 * __import__("math").factorial(n)))
    code, out, _ = run(capsys, "verify", "--quick", "--only", "1")
    assert code == 1 and "[FAIL] 1." in out

"""Command-line surface: outputs and exit codes."""

import json
import subprocess
import sys

import pytest

from birkhoff_facets.cli import main
from birkhoff_facets.reference import F4_ORBIT1, F4_ORBIT2, H4_COUNTEREXAMPLE, matrix_text


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_group_f4(capsys):
    code, out, _ = call(capsys, "group", "F4")
    assert code == 0 and out.strip() == "order 1152, dim 4"


def test_group_h4(capsys):
    code, out, _ = call(capsys, "group", "H4")
    assert code == 0 and out.strip() == "order 14400, dim 4, field Q(sqrt 5)"


def test_group_unknown(capsys):
    code, _, err = call(capsys, "group", "X9")
    assert code == 2 and "unknown group" in err


def test_group_dump(capsys, tmp_path):
    path = tmp_path / "i2.txt"
    assert call(capsys, "group", "I2_5", "--dump", str(path))[0] == 0
    assert len(path.read_text().strip().split("\n\n")) == 10


def test_usage_error(capsys):
    assert call(capsys, "enumerate")[0] == 2
    assert call(capsys, "frobnicate")[0] == 2
    assert call(capsys, "enumerate", "A3", "--direct", "--adjacency")[0] == 2


def _write(tmp_path, name, rows):
    p = tmp_path / name
    p.write_text(matrix_text(rows))
    return str(p)


def test_verify_f4_orbit1(capsys, tmp_path):
    code, out, _ = call(capsys, "verify", "F4", _write(tmp_path, "a.txt", F4_ORBIT1))
    assert code == 0
    assert out.strip() == "valid, incidence 288, facet: yes, rank 1, stabilizer 4608"


def test_verify_f4_orbit2(capsys, tmp_path):
    code, out, _ = call(capsys, "verify", "F4", _write(tmp_path, "a.txt", F4_ORBIT2))
    assert code == 0
    assert out.startswith("valid, incidence 36, facet: yes, rank 3, stabilizer 48")


def test_verify_scaled_is_invalid(capsys, tmp_path):
    rows = ["0 0 0 0", "0 0 0 0", "0 0 0 0", "2 0 0 -2"]
    code, out, _ = call(capsys, "verify", "F4", _write(tmp_path, "a.txt", rows))
    assert code == 0 and out.startswith("invalid")


def test_verify_h4(capsys, tmp_path):
    code, out, _ = call(capsys, "verify", "H4", _write(tmp_path, "h.txt", H4_COUNTEREXAMPLE))
    assert code == 0
    assert out.strip() == "valid, incidence 120, facet: yes, rank 2, stabilizer 120"


@pytest.mark.parametrize("rows", [["1 2", "3"], ["1 x", "0 1"], []])
def test_verify_parse_errors(capsys, tmp_path, rows):
    code, _, err = call(capsys, "verify", "F4", _write(tmp_path, "bad.txt", rows))
    assert code == 2


def test_verify_missing_file(capsys, tmp_path):
    assert call(capsys, "verify", "F4", str(tmp_path / "none.txt"))[0] == 2


def test_enumerate_direct_equals_adjacency(capsys, tmp_path):
    a, b = tmp_path / "a.db", tmp_path / "b.db"
    c1, out1, _ = call(capsys, "enumerate", "A3", "--direct", "--output", str(a), "--json")
    c2, out2, _ = call(capsys, "enumerate", "A3", "--adjacency", "--output", str(b), "--json")
    assert c1 == c2 == 0
    r1, r2 = json.loads(out1), json.loads(out2)
    assert r1 == r2
    assert r1["total_facets"] == 16


def test_enumerate_stop_and_resume(capsys, tmp_path):
    ck, out = tmp_path / "ck.db", tmp_path / "out.db"
    code, _, err = call(capsys, "enumerate", "I2_5", "--max-rounds", "0", "--checkpoint", str(ck),
                        "--output", str(out))
    assert code == 4 and ck.exists() and "checkpoint saved" in err
    code, text, _ = call(capsys, "enumerate", "I2_5", "--resume", str(ck), "--output", str(out))
    assert code == 0 and "facets 25" in text


def test_resume_wrong_group(capsys, tmp_path):
    ck = tmp_path / "ck.db"
    call(capsys, "enumerate", "A2", "--output", str(ck))
    assert call(capsys, "enumerate", "A3", "--resume", str(ck))[0] == 2


def test_report(capsys, tmp_path):
    db = tmp_path / "a.db"
    call(capsys, "enumerate", "A3", "--output", str(db))
    code, out, _ = call(capsys, "report", str(db))
    assert code == 0 and "incidence histogram" in out and "18" in out


def test_report_empty_database(capsys, tmp_path):
    from birkhoff_facets.store import OrbitDatabase, save_checkpoint
    path = tmp_path / "empty.db"
    save_checkpoint(OrbitDatabase(group="F4"), path)
    code, out, _ = call(capsys, "report", str(path))
    assert code == 0 and "orbits 0" in out


def test_report_corrupted(capsys, tmp_path):
    db = tmp_path / "a.db"
    call(capsys, "enumerate", "A3", "--output", str(db))
    db.write_text(db.read_text().replace("orbit 16", "orbit 15"))
    assert call(capsys, "report", str(db))[0] == 3


def test_report_missing_file(capsys, tmp_path):
    assert call(capsys, "report", str(tmp_path / "nope.db"))[0] == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "birkhoff_facets", "group", "A2"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0 and res.stdout.strip() == "order 6, dim 3"

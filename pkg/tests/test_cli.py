import io
import json
import subprocess
import sys

import numpy as np
import pytest

from blockweyl.cli import main, parse_z_list


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def complex_of(pair):
    return complex(*pair)


def test_green_free_anchor():
    code, out, _ = run("green", "--model", "free", "--z", "0,1", "--N", "1", "--xi", "0", "--out", "json")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert complex_of(row["G"][0][0]) == 1j
    assert row["oracle_delta"] < 1e-12 and row["herglotz_margin"] > 0


def test_green_csv_grid():
    code, out, _ = run("green", "--model", "geometric:2", "--z", "0,1;1,1;0,2", "--schedule", "1,2,4", "--out", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("z,N,G")
    assert len(lines) == 1 + 9


def test_corrupted_model_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"L": 2, "family": "explicit",
                                "T": [np.eye(2).tolist(), [[1, 1], [1, 1]]],
                                "V": [np.zeros((2, 2)).tolist()]}))
    code, _, err = run("green", "--model", str(path), "--N", "4")
    assert code == 2
    assert "n=3" in err and "T_3" in err


def test_invalid_inputs():
    assert run("green", "--model", "nosuch", "--N", "2")[0] == 2
    assert run("green", "--model", "free", "--z", "0,0.01")[0] == 2
    assert run("green", "--model", "free", "--z", "1;2")[0] == 2
    assert run("bogus")[0] == 2
    code, _, err = run("green", "--model", "free", "--z", "0,0.07")
    assert code == 0 and "warning" in err


def test_disc_table():
    code, out, _ = run("disc", "--model", "free", "--z", "0,1", "--N", "8", "--out", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    norms = [r["norm_R"] for r in rows]
    assert [r["N"] for r in rows] == list(range(1, 9))
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert all(r["norm_R"] <= r["bound"] for r in rows[1:])
    assert {r["nesting"] for r in rows[1:]} == {"strict"}


def test_classify_labels():
    expected = {"free": "LimitPoint (0,0)", "geometric:2": "CompletelyIndeterminate (1,1)",
                "block_mixed:2": "Intermediate (1,1), rank(R^z)=1"}
    for model, label in expected.items():
        code, out, _ = run("classify", "--model", model, "--out", "json")
        assert code == 0
        assert json.loads(out)["rows"][0]["label"] == label


def test_classify_unconverged_exit_code():
    assert run("classify", "--model", "geometric:2", "--schedule", "8,16")[0] == 1


def test_extension_rows(tmp_path):
    vfile = tmp_path / "v.json"
    vfile.write_text("[[1.0]]")
    code, out, _ = run("extension", "--model", "geometric:2", "--zeta", "0,1", "--V", str(vfile),
                       "--z", "0,1;0,2;1,1", "--out", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    anchor = rows[0]
    assert complex_of(anchor["W"][0][0]) == pytest.approx(-1j, abs=1e-8)
    assert anchor["anchor_error"] < 1e-8
    assert all(r["residual"] < 1e-6 for r in rows)


def test_extension_theta_sweep():
    code, out, _ = run("extension", "--model", "geometric:2", "--V", "[[1]]", "--z", "0,2",
                       "--theta", "0,1.5707963267948966,3.141592653589793", "--out", "json")
    assert code == 0
    rows = [r for r in json.loads(out)["rows"] if r["z"] == [0.0, 2.0]]
    Gs = [complex_of(r["G"][0][0]) for r in rows]
    assert len(Gs) == 3 and min(abs(a - b) for i, a in enumerate(Gs) for b in Gs[i + 1:]) > 1e-6


def test_extension_rejects_bad_V():
    assert run("extension", "--model", "free", "--V", "[[1]]")[0] == 2


def test_spectrum_free():
    code, out, _ = run("spectrum", "--model", "free", "--N", "2", "--out", "json")
    row = json.loads(out)["rows"][0]
    assert code == 0
    assert row["energies"] == pytest.approx([-1, 1])
    assert [w[0][0][0] for w in row["weights"]] == pytest.approx([0.5, 0.5])
    assert row["reconstruction_error"] < 1e-9


def test_spectrum_inline_model_psd_weights():
    model = json.dumps({"L": 2, "family": "explicit", "T": [[[1, 0.3], [0.1, 1.2]]],
                        "V": [[[0.5, 0.2], [0.2, -1]], [[0, 0], [0, 0.4]]]})
    code, out, _ = run("spectrum", "--model", model, "--N", "5", "--out", "json")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["min_weight_eig"] > -1e-12


def test_moebius_check_deterministic():
    a = run("moebius-check", "--seed", "11", "--trials", "200", "--out", "json")
    b = run("moebius-check", "--seed", "11", "--trials", "200", "--out", "json")
    assert a[0] == 0 and a[1] == b[1]
    rows = json.loads(a[1])["rows"]
    assert all(r["max_relative_error"] < 1e-10 for r in rows if "max_relative_error" in r)


def test_disc_output_byte_identical():
    args = ("disc", "--model", "geometric:2", "--N", "5", "--seed", "3", "--out", "json")
    assert run(*args)[1] == run(*args)[1]


def test_pretty_output_prints_eigenvalues():
    code, out, _ = run("classify", "--model", "block_mixed:2")
    assert code == 0 and "R_eigs" in out and "convergence at z" in out


def test_parse_z_list():
    assert parse_z_list("0,1; 1,-2") == [1j, 1 - 2j]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "blockweyl", "green", "--model", "free", "--N", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "oracle_delta" in proc.stdout

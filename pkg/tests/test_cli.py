import io
import json

import numpy as np
import pytest

from kdquasi.cli import (
    EXIT_DENSITY,
    EXIT_NOT_IN_DB,
    EXIT_OBSERVABLE,
    EXIT_OVERLAP,
    EXIT_PARSE,
    EXIT_SINGULAR,
    main,
    read_matrix,
    write_matrix,
)
from kdquasi.operators import PAULI_X, PAULI_Z

from conftest import KET0, KET_PLUS, proj


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, M in {
        "Z": PAULI_Z, "X": PAULI_X, "ket0": proj(KET0), "plus": proj(KET_PLUS),
        "mixed": np.eye(2) / 2, "bad_rho": np.diag([1.5, -0.5]), "I": np.eye(2),
    }.items():
        paths[name] = str(tmp_path / f"{name}.json")
        write_matrix(paths[name], M)
    return paths


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_matrix_file_round_trip(tmp_path):
    M = np.array([[1, 2 - 1j], [2 + 1j, -0.125]])
    write_matrix(tmp_path / "m.json", M)
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.json"), M)
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["dim"] == 2 and doc["data"][1] == [2.0, -1.0]


def test_kd_table(files):
    code, text = run(["kd", files["Z"], files["X"], files["ket0"], "--side", "left"])
    assert code == 0
    doc = json.loads(text)
    values = {(t["a"], t["b"]): complex(*t["value"]) for t in doc["table"]}
    assert values[("1:1", "1:1")] == pytest.approx(0.5)
    assert values[("1:1", "0:-1")] == pytest.approx(0.5)
    assert values[("0:-1", "0:-1")] == pytest.approx(0) and values[("0:-1", "1:1")] == pytest.approx(0)
    assert [m["value"][0] for m in doc["marginal_over_b"]] == pytest.approx([0, 1])


def test_kd_csv(files):
    code, text = run(["kd", files["Z"], files["X"], files["ket0"], "--format", "csv"])
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "a_label,b_label,re,im"
    row = next(line.split(",") for line in lines if line.startswith("1:1,1:1,"))
    assert float(row[2]) == pytest.approx(0.5, abs=1e-15)


def test_kd_same_basis(files):
    assert run(["kd", files["Z"], files["Z"], files["ket0"]])[0] == EXIT_OVERLAP


def test_kd_malformed_matrix(files, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dim": 2, "data": [[1, 0], [0, 0], [0, 0]]}))
    assert run(["kd", str(bad), files["X"], files["ket0"]])[0] == EXIT_PARSE
    bad.write_text("not json")
    assert run(["kd", files["Z"], files["X"], str(bad)])[0] == EXIT_PARSE


def test_kd_invalid_density(files):
    assert run(["kd", files["Z"], files["X"], files["bad_rho"]])[0] == EXIT_DENSITY


def test_degenerate_observable(files):
    assert run(["kd", files["I"], files["X"], files["ket0"]])[0] == EXIT_OBSERVABLE


def test_condexp_maximally_mixed(files):
    code, text = run(["condexp", files["Z"], files["X"], files["mixed"], "--kind", "left", "--check"])
    assert code == 0
    doc = json.loads(text)
    assert [c["value"] for c in doc["coeffs"]] == [[0.0, 0.0], [0.0, 0.0]]
    assert doc["oracle_disagreement"] < 1e-12


def test_condexp_not_in_D_B(files):
    assert run(["condexp", files["Z"], files["X"], files["plus"]])[0] == EXIT_NOT_IN_DB


def test_condexp_regularized(files):
    code, text = run(["condexp", files["Z"], files["X"], files["plus"], "--regularize", "1e-6"])
    assert code == 0
    assert all(np.isfinite(c["value"]).all() for c in json.loads(text)["coeffs"])


def test_condexp_alpha_requires_value(files):
    assert run(["condexp", files["Z"], files["X"], files["mixed"], "--kind", "alpha"])[0] == EXIT_PARSE


def test_dual_left(files):
    code, text = run(["dual", files["Z"], files["X"], "--alpha", "1"])
    assert code == 0
    doc = json.loads(text)
    assert doc["closed_form_deviation"] < 1e-10 and doc["biorthogonality_residual"] < 1e-12


def test_dual_singular_mix(files):
    assert run(["dual", files["Z"], files["X"], "--alpha", "0.5"])[0] == EXIT_SINGULAR


def test_verify_all(tmp_path):
    out = tmp_path / "report.json"
    code, text = run(["verify", "--suite", "all", "-d", "2", "--trials", "10", "--seed", "0", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["all_passed"] and len(doc["reports"]) == 5
    assert text.count("PASS") == 5


def test_verify_alphas_with_midpoint(tmp_path):
    out = tmp_path / "scan.json"
    code, _ = run(["verify", "--suite", "kd-uniqueness", "-d", "3", "--trials", "5",
                   "--alphas", "0,0.5,1", "--out", str(out)])
    assert code == 0
    rows = json.loads(out.read_text())["reports"][0]["details"]
    assert rows[1]["alpha"] == 0.5 and rows[1]["left_residual"] > 1e-5


def test_verify_midpoint_qubit_is_singular():
    assert run(["verify", "--suite", "kd-uniqueness", "-d", "2", "--trials", "2", "--alphas", "0,0.5,1"])[0] == EXIT_SINGULAR


def test_verify_bad_arguments():
    assert run(["verify", "--trials", "0"])[0] == EXIT_PARSE
    assert run(["verify", "-d", "9"])[0] == EXIT_PARSE
    assert run(["verify", "--suite", "nope"])[0] == EXIT_PARSE


def test_verify_csv(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["verify", "--suite", "classical", "--trials", "5", "--format", "csv", "--out", str(out)])[0] == 0
    assert out.read_text().splitlines()[0] == "theorem,instances,seed,max_residual,min_violation,passed"


def test_random_fixtures(tmp_path):
    for what in ("observable", "density"):
        path = tmp_path / f"{what}.json"
        assert run(["random", what, "-d", "3", "--seed", "5", "--out", str(path)])[0] == 0
        first = path.read_bytes()
        run(["random", what, "-d", "3", "--seed", "5", "--out", str(path)])
        assert path.read_bytes() == first
        assert read_matrix(path).shape == (3, 3)

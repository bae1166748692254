import json
import subprocess
import sys

import pytest

from osculant.cli import main


@pytest.fixture(scope="module")
def gallery_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("gallery")
    assert main(["save-gallery", str(d)]) == 0
    return d


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_helix_json(capsys, gallery_dir):
    code, out, err = run(capsys, "analyze", str(gallery_dir / "helix.spec"))
    assert code == 0, err
    doc = json.loads(out)
    assert list(doc) == ["meta", "levels", "dims", "oracle_dims", "checks", "stop_reason"]
    assert [lv["order"] for lv in doc["levels"]] == [1, 2]
    assert [lv["rank_k"] for lv in doc["levels"]] == [1, 1]
    for lv in doc["levels"]:
        assert lv["curvatures"] == [pytest.approx(0.25, rel=1e-12)]
    assert doc["checks"]["bound_satisfied"] and doc["checks"]["oracle_match"]
    assert doc["meta"]["tolerance"] == 1e-8
    assert "generated_at" not in doc["meta"]


def test_analyze_plane_stops_with_rank_zero(capsys, gallery_dir):
    code, out, _ = run(capsys, "analyze", str(gallery_dir / "plane.spec"))
    doc = json.loads(out)
    assert code == 0
    assert doc["stop_reason"] == "rank_zero"
    assert [lv["rank_k"] for lv in doc["levels"]] == [0]


def test_analyze_csv(capsys, gallery_dir):
    code, out, _ = run(capsys, "analyze", str(gallery_dir / "helix.spec"), "--format", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "name,order,index,rank_k,bound,curvature,sqrt_curvature,ill_conditioned"
    assert len(lines) == 3
    row = lines[1].split(",")
    assert row[:5] == ["helix", "1", "1", "1", "1"]
    assert float(row[5]) == pytest.approx(0.25, rel=1e-12)
    assert float(row[6]) == pytest.approx(0.5, rel=1e-12)
    assert row[7] == "false"


def test_analyze_overrides_and_out_file(capsys, gallery_dir, tmp_path):
    out_file = tmp_path / "r.json"
    code, out, _ = run(
        capsys, "analyze", str(gallery_dir / "helix.spec"), "--point", "0.7", "--max-order", "1", "--out", str(out_file)
    )
    assert code == 0 and out == ""
    doc = json.loads(out_file.read_text())
    assert doc["meta"]["base_point"] == [0.7] and doc["meta"]["max_order"] == 1
    assert doc["stop_reason"] == "max_order_reached"


def test_analyze_stamp(capsys, gallery_dir):
    _, out, _ = run(capsys, "analyze", str(gallery_dir / "circle.spec"), "--stamp")
    assert "generated_at" in json.loads(out)["meta"]


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "GALLERY/helix.spec", "--max-order", "0"],
        ["analyze", "GALLERY/helix.spec", "--point", "1,2"],
        ["analyze", "GALLERY/helix.spec", "--point", "x"],
        ["analyze", "GALLERY/helix.spec", "--tol", "2"],
        ["analyze", "GALLERY/missing.spec"],
        ["extremal", "--n", "0", "--r", "1"],
        ["extremal", "--n", "1", "--r", "0"],
        ["random", "--n", "3", "--m", "2"],
        ["bogus"],
        [],
    ],
)
def test_input_errors_exit_one(capsys, gallery_dir, argv):
    argv = [a.replace("GALLERY", str(gallery_dir)) for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err


def test_bad_spec_file_exit_one(capsys, tmp_path):
    p = tmp_path / "bad.spec"
    p.write_text('dim_domain = 1\ncomponents = ["u1 +"]\n')
    code, _, err = run(capsys, "analyze", str(p))
    assert code == 1 and "line 2" in err


def test_singular_point_exit_one(capsys, tmp_path):
    p = tmp_path / "cusp.spec"
    p.write_text('dim_domain = 1\ncomponents = ["u1^2", "u1^3"]\n')
    code, _, err = run(capsys, "analyze", str(p))
    assert code == 1 and "rank" in err


def test_tolerance_environment_variable(capsys, gallery_dir, monkeypatch):
    monkeypatch.setenv("OSCULANT_TOL", "1e-6")
    _, out, _ = run(capsys, "analyze", str(gallery_dir / "circle.spec"))
    assert json.loads(out)["meta"]["tolerance"] == 1e-6
    _, out, _ = run(capsys, "analyze", str(gallery_dir / "circle.spec"), "--tol", "1e-9")
    assert json.loads(out)["meta"]["tolerance"] == 1e-9
    monkeypatch.setenv("OSCULANT_TOL", "abc")
    code, _, _ = run(capsys, "analyze", str(gallery_dir / "circle.spec"))
    assert code == 1


@pytest.mark.parametrize("n, r, ranks", [(2, 2, [3, 4]), (1, 3, [1, 1, 1])])
def test_extremal_then_analyze(capsys, tmp_path, n, r, ranks):
    p = tmp_path / "e.spec"
    assert main(["extremal", "--n", str(n), "--r", str(r), "--out", str(p)]) == 0
    code, out, _ = run(capsys, "analyze", str(p))
    doc = json.loads(out)
    assert code == 0
    assert [lv["rank_k"] for lv in doc["levels"]] == ranks
    assert [lv["bound"] for lv in doc["levels"]] == ranks


def test_random_spec_round_trip(capsys):
    code, out, _ = run(capsys, "random", "--n", "2", "--m", "5", "--degree", "3", "--seed", "9")
    assert code == 0 and "dim_domain = 2" in out
    assert run(capsys, "random", "--n", "2", "--m", "5", "--degree", "3", "--seed", "9")[1] == out


def test_verify_gallery_passes(capsys, tmp_path):
    summary = tmp_path / "s.json"
    code, out, err = run(capsys, "verify", "--suite", "gallery", "--out", str(summary))
    assert code == 0, err
    assert out.rstrip().endswith("cases passed")
    doc = json.loads(summary.read_text())
    assert doc["passed"] and all(c["passed"] for c in doc["cases"])


def test_verify_absurd_tolerance_fails(capsys):
    code, out, err = run(capsys, "verify", "--suite", "gallery", "--tol", "0.5")
    assert code == 2
    assert "FAILED" in err


def test_verify_random_is_deterministic_and_thread_independent(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code_a, out_a, _ = run(capsys, "verify", "--suite", "random", "--count", "25", "--seed", "3", "--out", str(a))
    code_b, out_b, _ = run(
        capsys, "verify", "--suite", "random", "--count", "25", "--seed", "3", "--jobs", "4", "--out", str(b)
    )
    assert code_a == code_b == 0
    assert out_a == out_b
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(gallery_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "osculant", "analyze", str(gallery_dir / "circle.spec")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["levels"][0]["curvatures"] == [1.0]

import io
import json
import math
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout

import pytest

from cuspdet import cli, fuchsian


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.run(argv)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def mt_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("spec") / "mt.jsonl"
    code, out, _ = call(["spectrum", "--group", "modular_torus", "--L", "6", "--max-word", "14",
                         "--out", str(path)])
    assert code == 0
    return path


def test_no_arguments_prints_usage():
    code, out, err = call([])
    assert code == 2 and "usage" in err.lower() and out == ""


def test_unknown_flag_is_named():
    code, _, err = call(["index", "--g", "0", "--n", "3", "--bogus", "1"])
    assert code == 2 and "--bogus" in err


def test_missing_required_flag():
    code, _, err = call(["det", "--s", "2"])
    assert code == 2 and "--spectrum" in err


def test_index_example():
    code, out, _ = call(["index", "--g", "0", "--n", "3", "--l-range", "-2,3"])
    assert code == 0
    doc = json.loads(out)
    row = next(r for r in doc["rows"] if r["ell"] == 0)
    assert (row["index"], row["ker"], row["coker"]) == (1, 1, 0)
    assert [r["ell"] for r in doc["rows"]] == [-2, -1, 0, 1, 2, 3]
    prov = doc["provenance"]
    assert {"package", "version", "mpmath", "numpy", "parameters", "assumptions"} <= set(prov)


def test_spectrum_file_first_entry(mt_file):
    first = json.loads(mt_file.read_text().splitlines()[1])
    assert first["length"] == pytest.approx(2 * math.acosh(1.5), abs=1e-12)


def test_spectrum_to_stdout_matches_file(mt_file):
    code, out, _ = call(["spectrum", "--group", "modular_torus", "--L", "6", "--max-word", "14"])
    assert code == 0 and out == mt_file.read_text()


def test_spectrum_roundtrip_bytes(mt_file, tmp_path):
    again = tmp_path / "again.jsonl"
    fuchsian.write_spectrum(fuchsian.read_spectrum(mt_file), again)
    assert again.read_bytes() == mt_file.read_bytes()


def test_zeta_command(mt_file):
    code, out, _ = call(["zeta", "--spectrum", str(mt_file), "--s", "3", "--derivative"])
    doc = json.loads(out)
    assert code == 0
    assert {"log_value", "tail_estimate", "k_cut", "assumptions", "log_derivative"} <= set(doc)
    assert doc["provenance"]["assumptions"] == doc["assumptions"]


def test_zeta_at_one(mt_file):
    code, out, _ = call(["zeta", "--spectrum", str(mt_file), "--at-one", "--eps", "0.2,0.1,0.05"])
    doc = json.loads(out)
    assert code == 0 and "LOW-CONFIDENCE" in doc["zeta_prime_at_1"]["notes"]


def test_zeta_needs_s_or_at_one(mt_file):
    assert call(["zeta", "--spectrum", str(mt_file)])[0] == 2


def test_det_command(mt_file):
    code, out, _ = call(["det", "--spectrum", str(mt_file), "--s", "2"])
    doc = json.loads(out)
    assert code == 0 and doc["det_value"] > 0
    code, out, _ = call(["det", "--spectrum", str(mt_file), "--s", "2", "--dbar"])
    assert code == 0 and json.loads(out)["inputs"]["zeta_at_zero"] == pytest.approx(-(1 / 6 + 1))


def test_det_computation_errors(mt_file, tmp_path):
    assert call(["det", "--spectrum", str(mt_file), "--s", "1"])[0] == 1
    assert call(["det", "--spectrum", str(mt_file), "--s", "2", "--compact-g", "2"])[0] == 1
    assert call(["det", "--spectrum", str(tmp_path / "missing.jsonl"), "--s", "2"])[0] == 1


def test_det_compact(tmp_path):
    sp = fuchsian.LengthSpectrum.from_lengths(fuchsian.SurfaceType(2, 0), [3.0, 3.5, 4.0], cutoff=4.0)
    path = tmp_path / "g2.jsonl"
    fuchsian.write_spectrum(sp, path)
    code, out, _ = call(["det", "--spectrum", str(path), "--s", "2", "--compact-g", "2"])
    assert code == 0 and json.loads(out)["inputs"]["g"] == 2


def test_out_flag_writes_file(tmp_path):
    path = tmp_path / "idx.json"
    code, out, _ = call(["index", "--g", "1", "--n", "1", "--out", str(path)])
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["g"] == 1


def test_digits_recorded():
    code, out, _ = call(["index", "--g", "1", "--n", "1", "--digits", "50"])
    assert json.loads(out)["provenance"]["parameters"]["digits"] == 50


def test_classes_command():
    code, out, _ = call(["classes", "--D", "4", "--n", "2", "--g", "1", "--l-range", "0,2"])
    doc = json.loads(out)
    assert code == 0 and doc["half_coth_identity"]
    assert all(r["tc1_identity"] for r in doc["rows"])
    assert all(r["degree_zero_value"] == str(r["index_dbar"]) for r in doc["rows"])
    assert all(b["equal"] for b in doc["bini"])


def test_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("CUSPDET_CACHE_DIR", str(tmp_path / "cache"))
    argv = ["spectrum", "--group", "gamma2", "--L", "4", "--max-word", "8", "--out", str(tmp_path / "a.jsonl")]
    first = json.loads(call(argv)[1])
    second = json.loads(call(argv)[1])
    assert first["from_cache"] is False and second["from_cache"] is True
    assert list((tmp_path / "cache").iterdir())


def test_deterministic_subprocess(mt_file):
    argv = [sys.executable, "-m", "cuspdet.cli", "det", "--spectrum", str(mt_file), "--s", "2.5"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a


@pytest.mark.slow
def test_selftest_reports_failure():
    code, out, err = call(["selftest"])
    doc = json.loads(out)
    # criterion 4 is known to fail on the Stirling remainder of Z_cusp
    assert code == 1 and doc["failed"] == [4]
    assert len(doc["summary"]) == 8 and "criterion 4" in err

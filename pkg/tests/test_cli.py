import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from wignercorr.cli import run
from wignercorr.correlators import clear_memory_cache


def _schema(name):
    return json.loads(resources.files("wignercorr").joinpath("data", "schemas", name).read_text())


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exact_text(capsys):
    code, out, _ = _run(capsys, "exact", "--sig", "4")
    assert code == 0
    assert out.strip() == "2*N3*v2^2 + N2*v4"


def test_exact_with_evaluation(capsys):
    code, out, _ = _run(capsys, "exact", "--sig", "4", "--n", "5", "--ensemble", "gaussian")
    assert code == 0 and "= 180" in out


def test_exact_json_matches_schema(capsys):
    code, out, _ = _run(capsys, "connected", "--sig", "2,2", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, _schema("correlator.schema.json"))
    assert data["text"] == "2*N2*v4 - 2*N2*v2^2"


def test_expand_json_matches_schema(capsys):
    code, out, _ = _run(capsys, "expand", "--sig", "4", "--order", "3", "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), _schema("expansion.schema.json"))


@pytest.mark.parametrize("name", ["catalan", "special", "phi", "S4", "C2"])
def test_series_json_matches_schema(capsys, name):
    code, out, _ = _run(capsys, "series", "--name", name, "--order", "6", "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), _schema("series.schema.json"))


def test_mc_json_matches_schema(capsys):
    code, out, _ = _run(capsys, "mc", "--sig", "2", "--sig", "2,2", "--n", "6", "--samples", "2000", "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), _schema("scorecard.schema.json"))


def test_mc_csv(capsys):
    code, out, _ = _run(capsys, "mc", "--sig", "4", "--n", "6", "--samples", "2000", "--ensemble", "gaussian", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0].startswith("signature,connected")


def test_rj(capsys):
    code, out, _ = _run(capsys, "rj", "--j", "2", "--k", "5")
    assert code == 0 and float(out) == pytest.approx(120)
    code, out, _ = _run(capsys, "rj", "--j", "1", "--points", "5", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "y,R1" and len(out.splitlines()) == 6
    code, _, err = _run(capsys, "rj", "--j", "1", "--y", "3")
    assert code == 2 and "|y| < 2" in err


def test_diff_and_twopoint(capsys):
    code, out, _ = _run(capsys, "diff", "--sig", "6", "--ensemble", "gaussian", "--other", "rademacher")
    assert code == 0 and "MATCH" in out
    code, out, _ = _run(capsys, "diff", "--sig", "6", "--ensemble", "gaussian", "--other", "custom:1,3,14", "--j", "2")
    assert code == 2
    code, out, _ = _run(capsys, "twopoint", "--m", "3", "3")
    assert code == 0 and "6" in out and "MATCH" in out
    code, out, _ = _run(capsys, "twopoint", "--y1", "3", "--y2", "4", "--s2", "2", "--format", "json")
    data = json.loads(out)
    assert data["n2_Gc"] == pytest.approx(data["n2_Gc_resolvent_form"])
    code, _, _ = _run(capsys, "twopoint", "--y1", "3")
    assert code == 2


def test_fixtures(capsys):
    code, out, err = _run(capsys, "fixtures", "--suite", "appendix-e")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 36 and all(line.startswith("PASS") for line in lines)
    assert "36/36" in err


def test_usage_errors(capsys):
    assert _run(capsys, "exact")[0] == 2
    assert _run(capsys, "exact", "--sig", "x")[0] == 2
    assert _run(capsys, "exact", "--sig", "20")[0] == 2
    assert _run(capsys, "exact", "--sig", "4", "--max-degree", "20")[0] == 2
    assert _run(capsys, "fixtures", "--suite", "nope")[0] == 2
    assert _run(capsys, "mc", "--sig", "2", "--ensemble", "cauchy")[0] == 2


def test_large_cap_needs_acknowledgement(capsys):
    code, out, _ = _run(capsys, "exact", "--sig", "4", "--max-degree", "20", "--allow-large")
    assert code == 0


def test_cache_dir_flag(capsys, tmp_path):
    clear_memory_cache()
    code, _, _ = _run(capsys, "connected", "--sig", "4,4", "--method", "direct", "--cache-dir", str(tmp_path))
    assert code == 0 and list(tmp_path.glob("*.json"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wignercorr", "exact", "--sig", "2,2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "N4*v2^2 + 4*N3*v2^2 + 2*N2*v4"

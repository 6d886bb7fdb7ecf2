import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from expradon import read_ert, write_ert
from expradon.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, cli_main

MU = "--mu=0.3,0.2"


def run(*argv):
    return cli_main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    spec = d / "spec.json"
    assert run("phantom", "-o", d / "f.ert", "--radial-nodes", 64, "--n-max", 2, "--write-spec", spec) == EXIT_OK
    for name, mu in (("p", MU), ("pm", "--mu=-0.3,-0.2")):
        assert run("project", spec, "-o", d / f"{name}.ert", "--harmonic", mu, "--detectors", 256,
                   "--n-max", 2) == EXIT_OK
    assert run("derivative", d / "p.ert", "-o", d / "dp.ert") == EXIT_OK
    return d


def test_invert_scores_against_truth(pipeline, capsys):
    d = pipeline
    code = run("invert", d / "dp.ert", "-o", d / "rec.ert", "--radial-nodes", 64, "--truth", d / "spec.json")
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK and out["passed"] and out["max_rel_l2"] < 1e-2
    assert read_ert(d / "rec.ert").grid.count == 64


def test_validate_passes_then_fails_on_perturbed_data(pipeline, capsys):
    d = pipeline
    args = ["--checks", "evenness,moments", "--minus", d / "pm.ert"]
    assert run("validate", d / "p.ert", *args, "-o", d / "report.json") == EXIT_OK
    report = json.loads((d / "report.json").read_text())
    assert report["passed"] and "timestamp" in report
    h = read_ert(d / "p.ert")
    v = np.array(h.values)
    v[0] += 1e-3 * np.max(np.abs(v)) * np.exp(-((h.det.nodes - 0.3) / 0.05) ** 2)
    write_ert(d / "bad.ert", h.with_values(v))
    capsys.readouterr()
    assert run("validate", d / "bad.ert", *args) == EXIT_FAIL
    assert "failed checks" in capsys.readouterr().err


def test_direct_projection_and_render(tmp_path, pipeline):
    d = pipeline
    assert run("project", d / "spec.json", "-o", tmp_path / "s.ert", "--direct", MU, "--detectors", 64,
               "--angles", 16) == EXIT_OK
    assert run("decompose", tmp_path / "s.ert", "-o", tmp_path / "h.ert", "--n-max", 2) == EXIT_OK
    assert run("render", d / "f.ert", "-o", tmp_path / "f.pgm", "--pixels", 32) == EXIT_OK
    assert (tmp_path / "f.pgm").read_bytes().startswith(b"P5\n32 32\n")


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["project", "missing.json", "-o", "x.ert", "--harmonic"],
    ["project", "{spec}", "-o", "x.ert", "--harmonic", "--mu=a,b"],
    ["invert", "{spec}", "-o", "x.ert"],
])
def test_usage_errors_exit_2(argv, pipeline, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    argv = [a.replace("{spec}", str(pipeline / "spec.json")) for a in argv]
    assert run(*argv) == EXIT_USAGE


def test_selftest_and_bench(tmp_path, capsys):
    assert run("selftest", "--suite", "kernels") == EXIT_OK
    assert run("selftest", "--suite", "radial") == EXIT_FAIL
    out = tmp_path / "bench.csv"
    assert run("bench", "--mu=0.3,0.2", "--noise", "0", "--n-max-list", 1, "--methods", "unified",
               "--detectors", 128, "--radial-nodes", 32, "-o", out) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["method"] == "unified"


def test_console_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "expradon.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "selftest" in res.stdout

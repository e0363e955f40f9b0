import json
import os
import subprocess
import sys

import numpy as np
import pytest

from helmddm.harness.compare import compare_against_reference, format_report
from helmddm.harness.records import (RunRecord, SCHEMA_VERSION, read_records,
                                     write_records)
from helmddm.harness.suites import run_suite


def _rec(case, solver, family, iters):
    return RunRecord(suite="table-coated", case=case, config_hash=f"h{case}{solver}{family}",
                     geometry="circle", omega=1.0, eps1=16.0, alpha_rule="unit",
                     family=family, solver=solver, N0=64, N1=64,
                     iterations=iters, eps_inf=float("nan"), elapsed_s=0.1, tol=1e-4)


def test_records_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    write_records(path, [_rec("w1", "ddm", "Z", 13)])
    rows = read_records(path)
    assert rows[0]["schema_version"] == SCHEMA_VERSION
    assert rows[0]["iterations"] == "13"
    # identical hash is skipped without --force
    write_records(path, [_rec("w1", "ddm", "Z", 99)])
    assert read_records(path)[0]["iterations"] == "13"
    write_records(path, [_rec("w1", "ddm", "Z", 99)], force=True)
    assert read_records(path)[0]["iterations"] == "99"


def test_compare_verdicts(tmp_path):
    path = tmp_path / "table-coated.csv"
    recs = [_rec("w1", "ddm", "Z", 13), _rec("w2", "ddm", "Z", 16),
            _rec("w4", "ddm", "Z", 17), _rec("w8", "ddm", "Z", 20),
            _rec("w1", "cfiesk", "Z", 80), _rec("w2", "cfiesk", "Z", 160),
            _rec("w4", "cfiesk", "Z", 300), _rec("w8", "cfiesk", "Z", 600)]
    write_records(path, recs)
    verdicts, ok = compare_against_reference(path)
    assert ok
    assert len(verdicts) == 8
    # fabricated mismatch renders a fail verdict
    bad = [_rec("w1", "ddm", "Z", 99)]
    path2 = tmp_path / "bad" / "table-coated.csv"
    os.makedirs(path2.parent)
    write_records(path2, bad + recs[1:])
    verdicts, ok = compare_against_reference(path2)
    assert not ok
    report = format_report(verdicts)
    assert "FAIL" in report


def test_custom_suite_and_schema(tmp_path):
    from helmddm.scattering import ScatterConfig
    cfg = ScatterConfig(geometry="circle", omega=2.0, eps1=4.0, N0=64,
                        tol=1e-6, oversample=False)
    records, ok = run_suite("custom", str(tmp_path), {"config": cfg, "cfiesk": False})
    assert ok and len(records) == 1
    rows = read_records(tmp_path / "custom.csv")
    assert rows[0]["solver"] == "ddm"
    meta = json.loads((tmp_path / "custom-meta.json").read_text())
    assert meta["converged"]
    ff = (tmp_path / "custom-farfield.csv").read_text().splitlines()
    assert ff[0].startswith("schema_version")
    assert len(ff) == 1 + 1024


def test_cli_round_trip(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("geometry = circle\nomega = 2.0\neps1 = 4.0\n"
                       "N0 = 64\ntol = 1e-6\noversample = false\ncfiesk = false\n")
    out = tmp_path / "results"
    r = subprocess.run([sys.executable, "-m", "helmddm.harness.cli", "run",
                        "--suite", "custom", "--config", str(cfgfile),
                        "--out", str(out)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (out / "custom.csv").exists()
    r = subprocess.run([sys.executable, "-m", "helmddm.harness.cli",
                        "list-suites"], capture_output=True, text=True)
    assert "table-accuracy" in r.stdout


def test_cli_dump_operator(tmp_path):
    out = tmp_path / "op.npz"
    r = subprocess.run([sys.executable, "-m", "helmddm.harness.cli",
                        "dump-operator", "--kind", "S", "--geometry", "circle",
                        "--n", "32", "--wavenumber", "2.0", "--out", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    data = np.load(out)
    assert data["matrix"].shape == (32, 32)


def test_determinism_of_suite(tmp_path):
    from helmddm.scattering import ScatterConfig
    cfg = ScatterConfig(geometry="circle", omega=2.0, eps1=4.0, N0=64,
                        tol=1e-6, oversample=False)
    r1, _ = run_suite("custom", str(tmp_path / "a"), {"config": cfg, "cfiesk": False})
    r2, _ = run_suite("custom", str(tmp_path / "b"), {"config": cfg, "cfiesk": False})
    assert r1[0].iterations == r2[0].iterations
    assert r1[0].config_hash == r2[0].config_hash

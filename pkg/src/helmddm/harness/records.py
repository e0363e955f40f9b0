"""Run-record CSV store shared by the harness and the plotting component.

Schema (docs/formats.md): one header line, then one row per solve.  Files
are append-only; reruns with an identical config hash are skipped unless
--force is given.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import subprocess
from dataclasses import asdict, dataclass
from functools import lru_cache

SCHEMA_VERSION = "1"

FIELDS = ["schema_version", "suite", "case", "config_hash", "geometry",
          "omega", "eps1", "alpha_rule", "family", "solver", "N0", "N1",
          "iterations", "eps_inf", "elapsed_s", "tol", "build",
          "history_ref", "extra"]


@lru_cache(maxsize=1)
def build_id():
    """Package version plus git describe when a checkout is available."""
    from .. import __version__
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
            cwd=os.path.dirname(__file__)).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{__version__}+{desc}" if desc else __version__


@dataclass
class RunRecord:
    suite: str
    case: str
    config_hash: str
    geometry: str
    omega: float
    eps1: float
    alpha_rule: str
    family: str
    solver: str
    N0: int
    N1: int
    iterations: int
    eps_inf: float
    elapsed_s: float
    tol: float
    build: str = ""
    history_ref: str = ""
    extra: str = ""
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        if not self.build:
            self.build = build_id()

    def row(self):
        d = asdict(self)
        return [d[k] for k in FIELDS]


def config_hash(config, **extras):
    blob = json.dumps({**{k: repr(v) for k, v in sorted(vars(config).items())},
                       **{k: repr(v) for k, v in sorted(extras.items())}},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_records(path, records, force=False):
    """Append records; skip rows whose config hash already exists."""
    existing = set()
    if os.path.exists(path) and not force:
        for r in read_records(path):
            existing.add((r["case"], r["config_hash"]))
    mode = "a" if os.path.exists(path) and not force else "w"
    with open(path, mode, newline="") as fh:
        w = csv.writer(fh)
        if mode == "w":
            w.writerow(FIELDS)
        for rec in records:
            if (rec.case, rec.config_hash) in existing:
                continue
            w.writerow(rec.row())


def read_records(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        if r.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"{path}: schema version {r.get('schema_version')!r} "
                             f"!= {SCHEMA_VERSION}")
    return rows


def write_eigenvalues(path, case, eigenvalues):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["schema_version", "case", "index", "re", "im"])
        for i, lam in enumerate(eigenvalues):
            w.writerow([SCHEMA_VERSION, case, i, f"{lam.real:.16e}", f"{lam.imag:.16e}"])


def write_farfield(path, ff):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["schema_version", "index", "angle", "re", "im"])
        for i, (a, v) in enumerate(zip(ff.angles, ff.values)):
            w.writerow([SCHEMA_VERSION, i, f"{a:.16e}", f"{v.real:.16e}", f"{v.imag:.16e}"])


def write_grid(path, grid):
    """Near-field grid: two comment header lines, then re,im rows (row-major)."""
    x0, x1, y0, y1 = grid.window
    nx, ny = grid.resolution
    with open(path, "w") as fh:
        fh.write("# helmddm-grid v1\n")
        fh.write(f"# nx={nx} ny={ny} x0={x0} x1={x1} y0={y0} y1={y1}\n")
        for v in grid.values.ravel():
            if v != v:  # NaN mask
                fh.write("nan,nan\n")
            else:
                fh.write(f"{v.real:.9e},{v.imag:.9e}\n")


def write_meta(path, meta):
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)

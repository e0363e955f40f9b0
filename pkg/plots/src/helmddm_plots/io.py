"""Readers for the harness file formats (docs/formats.md in the solver repo).

This package never imports the solver; these schemas are its only contract.
"""

from __future__ import annotations

import csv

import numpy as np

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    pass


def _check_version(rows, path):
    if not rows:
        raise SchemaError(f"{path}: empty file")
    for r in rows:
        if r.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"{path}: schema_version "
                              f"{r.get('schema_version')!r} != {SCHEMA_VERSION}")


def read_run_records(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    _check_version(rows, path)
    for r in rows:
        for key in ("omega", "eps_inf", "elapsed_s", "tol"):
            r[key] = float(r[key])
        for key in ("N0", "N1", "iterations"):
            r[key] = int(r[key])
    return rows


def read_eigenvalues(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    _check_version(rows, path)
    return np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])


def read_farfield(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    _check_version(rows, path)
    angles = np.array([float(r["angle"]) for r in rows])
    values = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    return angles, values


def read_grid(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "# helmddm-grid v1":
            raise SchemaError(f"{path}: unexpected grid header {header!r}")
        meta = {}
        for item in fh.readline().lstrip("#").split():
            key, val = item.split("=")
            meta[key] = float(val)
        vals = []
        for line in fh:
            re_s, im_s = line.strip().split(",")
            vals.append(complex(float(re_s), float(im_s)))
    nx, ny = int(meta["nx"]), int(meta["ny"])
    grid = np.array(vals).reshape(ny, nx)
    window = (meta["x0"], meta["x1"], meta["y0"], meta["y1"])
    return grid, window

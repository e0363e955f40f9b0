"""Comparison of suite outputs against the reference-table values.

Expected values live here with one tolerance policy per table; the verdict
report lists every checked cell.  Policies:

  rel:p    measured within a factor (1 +- p) of the reference count
  band:a,b measured inside the closed interval [a, b]
"""

from __future__ import annotations

from dataclasses import dataclass

from .records import read_records

# reference iteration counts (rows keyed by case), per solver column
REFERENCE_TABLES = {
    "table-accuracy": {
        "policy": {"ddm:Z": "band:22,29", "cfiesk": "band:46,56"},
        "cells": {
            ("N72", "ddm:Z"): 26, ("N144", "ddm:Z"): 26, ("N288", "ddm:Z"): 26,
            ("N572", "ddm:Z"): 25, ("N1144", "ddm:Z"): 25,
            ("N72", "cfiesk"): 51, ("N144", "cfiesk"): 51, ("N288", "cfiesk"): 51,
            ("N572", "cfiesk"): 51, ("N1144", "cfiesk"): 51,
        },
    },
    "table-square": {
        "policy": {"ddm:Z": "rel:0.3", "ddm:Za": "rel:0.3", "cfiesk": "rel:0.3"},
        "cells": {
            ("w1", "ddm:Z"): 10, ("w2", "ddm:Z"): 11, ("w4", "ddm:Z"): 12,
            ("w8", "ddm:Z"): 10, ("w16", "ddm:Z"): 11, ("w32", "ddm:Z"): 13,
            ("w1", "ddm:Za"): 20, ("w2", "ddm:Za"): 28, ("w4", "ddm:Za"): 46,
            ("w8", "ddm:Za"): 84, ("w16", "ddm:Za"): 151, ("w32", "ddm:Za"): 253,
            ("w1", "cfiesk"): 24, ("w2", "cfiesk"): 39, ("w4", "cfiesk"): 93,
            ("w8", "cfiesk"): 162, ("w16", "cfiesk"): 333, ("w32", "cfiesk"): 565,
        },
    },
    "table-lshape": {
        "policy": {"ddm:Z": "rel:0.35", "ddm:Za": "rel:0.35", "cfiesk": "rel:0.35"},
        "cells": {
            ("w1", "ddm:Z"): 15, ("w2", "ddm:Z"): 15, ("w4", "ddm:Z"): 16,
            ("w8", "ddm:Z"): 15, ("w16", "ddm:Z"): 21, ("w32", "ddm:Z"): 22,
            ("w1", "ddm:Za"): 31, ("w2", "ddm:Za"): 46, ("w4", "ddm:Za"): 81,
            ("w8", "ddm:Za"): 112, ("w16", "ddm:Za"): 276, ("w32", "ddm:Za"): 488,
            ("w1", "cfiesk"): 43, ("w2", "cfiesk"): 72, ("w4", "cfiesk"): 135,
            ("w8", "cfiesk"): 208, ("w16", "cfiesk"): 493, ("w32", "cfiesk"): 887,
        },
    },
    "table-inner-iters": {
        "policy": {"A0": "rel:0.3"},
        "cells": {
            ("square-k1", "A0"): 13, ("square-k2", "A0"): 17,
            ("square-k4", "A0"): 24, ("square-k8", "A0"): 31,
            ("square-k16", "A0"): 35,
        },
    },
    "table-coated": {
        "policy": {"ddm:Z": "rel:0.3", "cfiesk": "rel:0.3"},
        "cells": {
            ("w1", "ddm:Z"): 13, ("w2", "ddm:Z"): 17, ("w4", "ddm:Z"): 17,
            ("w8", "ddm:Z"): 19,
            ("w1", "cfiesk"): 85, ("w2", "cfiesk"): 165, ("w4", "cfiesk"): 315,
            ("w8", "cfiesk"): 617,
        },
    },
    "fig-subdomain-scaling": {
        "policy": {"ddm-3sub": "rel:0.3"},
        "cells": {("lshape-3", "ddm-3sub"): 106},
    },
}


@dataclass
class Verdict:
    table: str
    case: str
    column: str
    reference: float
    measured: float
    policy: str
    passed: bool


def _column(record):
    if record["solver"].startswith("ddm"):
        tag = record["solver"]
        if tag == "ddm":
            return f"ddm:{record['family']}"
        return tag
    return record["solver"]


def compare_against_reference(csv_path, table=None):
    """Per-cell verdicts for one suite CSV; returns (verdicts, all_passed)."""
    rows = read_records(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no records")
    table = table or rows[0]["suite"]
    if table not in REFERENCE_TABLES:
        raise KeyError(f"no reference values for table {table!r}")
    spec = REFERENCE_TABLES[table]
    measured = {}
    for r in rows:
        measured[(r["case"], _column(r))] = float(r["iterations"])
    verdicts = []
    for (case, col), ref in sorted(spec["cells"].items()):
        policy = spec["policy"].get(col)
        if policy is None or (case, col) not in measured:
            continue
        got = measured[(case, col)]
        if policy.startswith("rel:"):
            p = float(policy.split(":")[1])
            ok = (1 - p) * ref <= got <= (1 + p) * ref
        elif policy.startswith("band:"):
            a, b = (float(x) for x in policy.split(":")[1].split(","))
            ok = a <= got <= b
        else:
            raise ValueError(f"unknown policy {policy!r}")
        verdicts.append(Verdict(table=table, case=case, column=col,
                                reference=ref, measured=got, policy=policy,
                                passed=ok))
    return verdicts, all(v.passed for v in verdicts)


def format_report(verdicts):
    lines = [f"{'case':18s} {'column':10s} {'reference':>9s} {'measured':>9s} "
             f"{'policy':>10s}  verdict"]
    for v in verdicts:
        lines.append(f"{v.case:18s} {v.column:10s} {v.reference:9.0f} {v.measured:9.0f} "
                     f"{v.policy:>10s}  {'pass' if v.passed else 'FAIL'}")
    return "\n".join(lines)

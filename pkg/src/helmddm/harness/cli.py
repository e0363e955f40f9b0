"""Command-line harness: run suites, compare against the reference tables,
dump operators for debugging.

    helmddm run --suite table-square --out results/
    helmddm compare --suite table-square --in results/
    helmddm list-suites
    helmddm dump-operator --kind S --geometry circle --size 1 --n 64 \
        --wavenumber 2.0 --out S.npz

The config file is layered key = value text (see docs/formats.md); CLI
flags override file values.  HDDM_THREADS caps the numeric thread pools.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np


def _apply_thread_cap():
    cap = os.environ.get("HDDM_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_apply_thread_cap()

from ..scattering import ScatterConfig                      # noqa: E402
from .compare import REFERENCE_TABLES, compare_against_reference, format_report  # noqa: E402
from .suites import SUITES, run_suite                       # noqa: E402

_FLOAT_KEYS = {"size", "omega", "eps0", "eps1", "incidence", "tol",
               "pade_theta", "cutoff_width", "pec_fraction"}
_INT_KEYS = {"N0", "N1", "max_iter", "grading_degree", "pade_order",
             "far_directions"}
_BOOL_KEYS = {"oversample", "coated", "errors", "force", "lshape",
              "near_field", "cfiesk"}


def parse_config_file(path):
    """key = value per line; '#' comments; unknown keys become suite options."""
    cfg_kw, opts = {}, {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            target = cfg_kw if key in ScatterConfig.__dataclass_fields__ else opts
            if key in _FLOAT_KEYS:
                target[key] = float(val)
            elif key in _INT_KEYS:
                target[key] = int(val)
            elif key in _BOOL_KEYS:
                target[key] = val.lower() in ("1", "true", "yes", "on")
            elif key in ("omegas", "sizes", "orders", "k0s"):
                target[key] = [float(x) for x in val.split(",")]
            elif key in ("geometries", "families"):
                target[key] = [x.strip() for x in val.split(",")]
            else:
                target[key] = val
    return cfg_kw, opts


def cmd_run(args):
    opts = {}
    cfg_kw = {}
    if args.config:
        cfg_kw, opts = parse_config_file(args.config)
    if args.tol is not None:
        opts["tol"] = args.tol
        cfg_kw["tol"] = args.tol
    opts["force"] = args.force
    opts["jobs"] = args.jobs
    if args.suite == "custom":
        opts["config"] = ScatterConfig(**cfg_kw)
    records, ok = run_suite(args.suite, args.out, opts)
    print(f"{args.suite}: {len(records)} runs -> {args.out} "
          f"({'converged' if ok else 'NON-CONVERGED RUNS PRESENT'})")
    return 0 if ok else 1


def cmd_compare(args):
    path = os.path.join(args.indir, f"{args.suite}.csv")
    verdicts, ok = compare_against_reference(path, table=args.suite)
    print(format_report(verdicts))
    print(f"=> {'all cells pass' if ok else 'FAILED cells present'}")
    return 0 if ok else 1


def cmd_list(args):
    for name in sorted(SUITES):
        ref = " [has reference values]" if name in REFERENCE_TABLES else ""
        print(f"{name}{ref}")
    return 0


def cmd_dump(args):
    from .. import geometry as geom
    from ..nystrom import assemble_bio
    curve = {"circle": geom.circle, "square": geom.square,
             "l-shape": geom.l_shape}[args.geometry](args.size)
    mesh = geom.build_graded_mesh(curve, args.n, args.degree)
    op = assemble_bio(args.kind, mesh, complex(args.wavenumber),
                      oversample=args.oversample)
    np.savez(args.out, kind=args.kind, k=op.k, matrix=op.matrix,
             points=mesh.points, jac=mesh.jac, t=mesh.t)
    print(f"wrote {args.kind} ({mesh.N}x{mesh.N}) to {args.out}")
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog="helmddm",
                                 description="Helmholtz transmission DDM workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--config", help="layered key=value config file")
    p.add_argument("--out", default="results")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--force", action="store_true",
                   help="overwrite records with matching config hashes")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("compare", help="check a suite CSV against the reference values")
    p.add_argument("--suite", required=True)
    p.add_argument("--in", dest="indir", default="results")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("list-suites", help="list available suites")
    p.set_defaults(fn=cmd_list)

    p = sub.add_parser("dump-operator", help="export one collocation matrix (npz)")
    p.add_argument("--kind", required=True, choices=["S", "K", "KT", "N"])
    p.add_argument("--geometry", default="circle",
                   choices=["circle", "square", "l-shape"])
    p.add_argument("--size", type=float, default=1.0)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--wavenumber", type=float, default=1.0)
    p.add_argument("--oversample", action="store_true")
    p.add_argument("--out", default="operator.npz")
    p.set_defaults(fn=cmd_dump)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

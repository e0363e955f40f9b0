"""Named experiment suites reproducing the reference tables and figure data.

Each suite builds its ScatterConfigs from a preset (overridable through the
config file / CLI flags), runs the solvers, and emits one CSV of run
records plus side files (eigenvalues, far fields, near-field grids) and a
JSON metadata sidecar.  Exit status is carried by the boolean returned
from run_suite: False when any run failed to converge.
"""

from __future__ import annotations

import json
import os
import time
import traceback

import numpy as np

from .. import geometry as geom
from ..cfiesk import assemble_cfiesk, solve_cfiesk, solve_reference
from ..ddm import (build_ddm, iteration_operator_spectrum, solve_ddm,
                   transmission_for)
from ..ddm_multi import solve_ddm_multi
from ..linalg import GmresStagnation
from ..rtr import inner_iteration_count
from ..scattering import ScatterConfig, farfield_error, near_field_grid
from .records import (RunRecord, config_hash, write_eigenvalues,
                      write_farfield, write_grid, write_meta, write_records)

FAMILIES = ("Z", "ZPS", "Za")


def _record(suite, case, cfg, solver, iters, eps, dt, extra="", history_ref=""):
    return RunRecord(suite=suite, case=case, config_hash=config_hash(cfg, solver=solver),
                     geometry=cfg.geometry, omega=cfg.omega, eps1=cfg.eps1,
                     alpha_rule=cfg.alpha_rule, family=cfg.family, solver=solver,
                     N0=cfg.N0, N1=cfg.N1, iterations=iters, eps_inf=eps,
                     elapsed_s=round(dt, 3), tol=cfg.tol,
                     history_ref=history_ref, extra=extra)


def _history_ref(out, suite, case, solver, cfg, history):
    """Write the GMRES residual history sidecar; returns its relative name."""
    name = f"{suite}-history-{case}-{solver}-{cfg.family}.csv"
    with open(os.path.join(out, name), "w") as fh:
        fh.write("iteration,relative_residual\n")
        for i, r in enumerate(history, start=1):
            fh.write(f"{i},{r:.6e}\n")
    return name


def _run_ddm(suite, case, cfg, reference=None, out=None):
    t0 = time.time()
    try:
        sol = solve_ddm(build_ddm(cfg))
    except GmresStagnation as exc:
        return _record(suite, case, cfg, "ddm", -1, float("nan"),
                       time.time() - t0, extra=f"non-converged:{exc.residual:.1e}"), None
    eps = farfield_error(sol.far_field(), reference) if reference is not None else float("nan")
    href = _history_ref(out, suite, case, "ddm", cfg, sol.history) if out else ""
    return _record(suite, case, cfg, "ddm", sol.iterations, eps,
                   time.time() - t0, history_ref=href), sol


def _run_cfiesk(suite, case, cfg, reference=None):
    t0 = time.time()
    try:
        sol = solve_cfiesk(assemble_cfiesk(cfg), tol=cfg.tol,
                           max_iter=max(cfg.max_iter, 4000))
    except GmresStagnation as exc:
        return _record(suite, case, cfg, "cfiesk", -1, float("nan"),
                       time.time() - t0, extra=f"non-converged:{exc.residual:.1e}"), None
    eps = farfield_error(sol.far_field(), reference) if reference is not None else float("nan")
    return _record(suite, case, cfg, "cfiesk", sol.iterations, eps, time.time() - t0), sol


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def suite_table_accuracy(out, opts):
    """Refinement study: L-shape, omega=2, eps1=4, tol 1e-12."""
    sizes = opts.get("sizes", [72, 144, 288, 572, 1144])
    base = ScatterConfig(geometry="l-shape", size=4.0, omega=2.0, eps1=4.0,
                         tol=1e-12, max_iter=2000, oversample=False, N0=int(sizes[-1]))
    ref = solve_reference(base, refine=2.0).far_field()
    records = []
    for N in sizes:
        for fam in FAMILIES:
            cfg = base.with_(N0=int(N), N1=0, family=fam)
            records.append(_run_ddm("table-accuracy", f"N{N}", cfg, ref, out)[0])
        records.append(_run_cfiesk("table-accuracy", f"N{N}", base.with_(N0=int(N), N1=0), ref)[0])
    write_records(os.path.join(out, "table-accuracy.csv"), records, opts.get("force", False))
    return records


def _frequency_table(suite, geometry, out, opts):
    omegas = opts.get("omegas", [1, 2, 4, 8, 16, 32])
    tol = opts.get("tol", 1e-4)
    jobs = int(opts.get("jobs", 1) or 1)

    def one_row(om):
        N = int(opts.get("n_per_omega", 64) * om)
        base = ScatterConfig(geometry=geometry, size=4.0, omega=float(om), eps1=16.0,
                             N0=N, tol=tol, max_iter=4000, oversample=False)
        ref = solve_reference(base, refine=2.0).far_field() if opts.get("errors", True) else None
        row = [_run_ddm(suite, f"w{om:g}", base.with_(family=fam), ref, out)[0]
               for fam in FAMILIES]
        row.append(_run_cfiesk(suite, f"w{om:g}", base, ref)[0])
        return row

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one_row, omegas))
    else:
        rows = [one_row(om) for om in omegas]
    records = [r for row in rows for r in row]
    write_records(os.path.join(out, f"{suite}.csv"), records, opts.get("force", False))
    return records


def suite_table_square(out, opts):
    """Frequency sweep on the size-4 square, eps1=16."""
    return _frequency_table("table-square", "square", out, opts)


def suite_table_lshape(out, opts):
    """Frequency sweep on the size-4 L-shape, eps1=16."""
    return _frequency_table("table-lshape", "l-shape", out, opts)


def suite_table_nonconforming(out, opts):
    """Conforming vs N0 = 0.75*N1 meshes, transmission operators Z."""
    omegas = opts.get("omegas", [4, 8, 16, 32])
    records = []
    for geometry in ("square", "l-shape"):
        for om in omegas:
            N1 = int(64 * om)
            base = ScatterConfig(geometry=geometry, size=4.0, omega=float(om),
                                 eps1=16.0, N0=N1, family="Z", tol=1e-4,
                                 max_iter=2000, oversample=False)
            ref = solve_reference(base, refine=2.0).far_field() if opts.get("errors", True) else None
            records.append(_run_ddm("table-nonconforming", f"{geometry}-w{om}-conf", base, ref, out)[0])
            nc = base.with_(N0=int(0.75 * N1) + (int(0.75 * N1) % 2), N1=N1)
            records.append(_run_ddm("table-nonconforming", f"{geometry}-w{om}-nc", nc, ref, out)[0])
    write_records(os.path.join(out, "table-nonconforming.csv"), records, opts.get("force", False))
    return records


def _smooth_ensemble(mesh, n, seed=0):
    rng = np.random.default_rng(seed)
    mm = min(mesh.N // 4, 24)
    modes = np.arange(-mm, mm + 1)
    out = []
    for _ in range(n):
        c = (rng.standard_normal(len(modes)) + 1j * rng.standard_normal(len(modes)))
        c /= (1.0 + np.abs(modes)) ** 2
        out.append(np.exp(1j * np.outer(mesh.t, modes)) @ c)
    return out


def suite_table_inner_iters(out, opts):
    """GMRES counts of the three RtR formulation systems.

    Protocol: median count over a fixed ensemble of 5 random smooth Robin
    data vectors (seed 0), relative residual 1e-4, oversampled quadrature.
    """
    geometries = opts.get("geometries", ["square", "l-shape"])
    k0s = opts.get("k0s", [1, 2, 4, 8, 16])
    records = []
    for geometry in geometries:
        for i, k0 in enumerate(k0s):
            N = int(64 * k0)
            cfg = ScatterConfig(geometry=geometry, size=4.0, omega=float(k0),
                                eps1=16.0, N0=N, family="Z", tol=1e-4, oversample=True)
            mesh = geom.build_graded_mesh(cfg.curve(), N, cfg.grading_degree)
            rhs = _smooth_ensemble(mesh, opts.get("ensemble", 5))
            z0 = transmission_for(cfg, 0, mesh)
            z1 = transmission_for(cfg, 1, mesh)
            k1 = cfg.k[1]
            for form in ("A", "B", "C"):
                t0 = time.time()
                c_ext = int(np.median(inner_iteration_count(
                    form, "exterior", mesh, k0, cfg.alpha[0], z0, rhs,
                    kappa_reg=cfg.kappa(0), oversample=True, tol=1e-4)))
                c_int = int(np.median(inner_iteration_count(
                    form, "interior", mesh, k1, cfg.alpha[1], z1, rhs,
                    kappa_reg=cfg.kappa(1), oversample=True, tol=1e-4)))
                records.append(_record("table-inner-iters", f"{geometry}-k{k0}", cfg,
                                       f"{form}0", c_ext, float("nan"), time.time() - t0))
                records.append(_record("table-inner-iters", f"{geometry}-k{k0}", cfg,
                                       f"{form}1", c_int, float("nan"), 0.0, extra=f"k1={k1}"))
    write_records(os.path.join(out, "table-inner-iters.csv"), records, opts.get("force", False))
    return records


def suite_fig_eigenvalues(out, opts):
    """Spectrum of the DDM iteration operator, L-shape eps1=16."""
    omegas = opts.get("omegas", [16])
    records = []
    for om in omegas:
        N = int(64 * om)
        cfg = ScatterConfig(geometry="l-shape", size=4.0, omega=float(om), eps1=16.0,
                            N0=N, family="Z", tol=1e-4, oversample=False)
        t0 = time.time()
        lam = iteration_operator_spectrum(build_ddm(cfg))
        case = f"w{om:g}"
        write_eigenvalues(os.path.join(out, f"eigenvalues-{case}.csv"), case, lam)
        frac = float(np.mean(np.abs(lam - 1.0) < 0.15))
        records.append(_record("fig-eigenvalues", case, cfg, "spectrum", len(lam),
                               frac, time.time() - t0, extra="eps_inf=cluster-fraction"))
    write_records(os.path.join(out, "fig-eigenvalues.csv"), records, opts.get("force", False))
    return records


def suite_fig_pade(out, opts):
    """DDM counts vs rational-operator order, with the ZPS baseline."""
    om = opts.get("omega", 8.0)
    N = int(64 * om)
    base = ScatterConfig(geometry="square", size=4.0, omega=float(om), eps1=16.0,
                         N0=N, tol=1e-4, max_iter=2000, oversample=False)
    records = []
    rec, _ = _run_ddm("fig-pade-sweep", "baseline", base.with_(family="ZPS"))
    records.append(rec)
    for p in opts.get("orders", [2, 4, 8, 16, 32]):
        cfg = base.with_(family="ZPade", pade_order=int(p))
        rec, _ = _run_ddm("fig-pade-sweep", f"p{p}", cfg)
        rec.extra = f"p={p}"
        records.append(rec)
    write_records(os.path.join(out, "fig-pade-sweep.csv"), records, opts.get("force", False))
    return records


def suite_fig_subdomains(out, opts):
    """Iteration growth with the number of subdomains."""
    om = opts.get("omega", 8.0)
    N = int(64 * om)
    records = []
    for fam in opts.get("families", ["Z", "ZPS", "Za"]):
        base = ScatterConfig(geometry="circle", size=1.0, omega=float(om), eps1=16.0,
                             N0=N, family=fam, tol=1e-4, max_iter=4000,
                             cutoff_width=0.1, oversample=False)
        for scheme, nsub in (("none", 1), ("half-circle", 2), ("quarter-circle", 4)):
            t0 = time.time()
            sol = solve_ddm_multi(base.with_(scheme=scheme))
            records.append(_record("fig-subdomain-scaling", f"circle-{nsub}", base,
                                   f"ddm-{nsub}sub", sol.iterations, float("nan"),
                                   time.time() - t0, extra=f"subdomains={nsub}"))
    if opts.get("lshape", True):
        cfgL = ScatterConfig(geometry="l-shape", size=4.0, omega=4.0, eps1=16.0,
                             N0=256, family="Z", tol=1e-4, max_iter=4000,
                             scheme="lshape3", cutoff_width=0.1, oversample=False)
        t0 = time.time()
        solL = solve_ddm_multi(cfgL)
        records.append(_record("fig-subdomain-scaling", "lshape-3", cfgL, "ddm-3sub",
                               solL.iterations, float("nan"), time.time() - t0,
                               extra="subdomains=3"))
    write_records(os.path.join(out, "fig-subdomain-scaling.csv"), records,
                  opts.get("force", False))
    return records


def suite_table_coated(out, opts):
    """Coated benchmark: circle with PEC lower semicircle, eps1=16 sweep.

    Counts at the table tolerance; the DDM<->CFIESK cross error at a
    tightened solver tolerance so it measures discretization agreement.
    """
    omegas = opts.get("omegas", [1, 2, 4, 8])
    records = []
    for i, om in enumerate(omegas):
        N = int(64 * om)
        base = ScatterConfig(geometry="circle", size=1.0, omega=float(om), eps1=16.0,
                             N0=N, tol=1e-4, max_iter=6000, coated=True,
                             cutoff_width=0.01, oversample=False)
        csol_t = solve_cfiesk(assemble_cfiesk(base.with_(tol=1e-6)), tol=1e-6,
                              max_iter=8000)
        ref = csol_t.far_field()
        for fam in FAMILIES:
            cfg = base.with_(family=fam)
            rec, sol = _run_ddm("table-coated", f"w{om:g}", cfg, out=out)
            sol_t = solve_ddm(build_ddm(cfg.with_(tol=1e-6)), tol=1e-6)
            rec.eps_inf = farfield_error(sol_t.far_field(), ref)
            records.append(rec)
        records.append(_run_cfiesk("table-coated", f"w{om:g}", base)[0])
        if opts.get("near_field", False) and om == omegas[-1]:
            sol = solve_ddm(build_ddm(base.with_(family="Z")))
            grid = near_field_grid(sol, (-3, 3, -3, 3), (opts.get("grid_n", 120),) * 2)
            write_grid(os.path.join(out, f"nearfield-w{om}.grid"), grid)
    write_records(os.path.join(out, "table-coated.csv"), records, opts.get("force", False))
    return records


def suite_near_field(out, opts):
    """Total-field image for the coated circle."""
    om = opts.get("omega", 4.0)
    cfg = ScatterConfig(geometry="circle", size=1.0, omega=float(om), eps1=16.0,
                        N0=int(64 * om), family="Z", tol=1e-6, max_iter=6000,
                        coated=True, cutoff_width=0.01, oversample=False,
                        incidence=opts.get("incidence", np.pi / 2 * 3))
    t0 = time.time()
    sol = solve_ddm(build_ddm(cfg))
    n = opts.get("grid_n", 160)
    grid = near_field_grid(sol, opts.get("window", (-3, 3, -3, 3)), (n, n))
    write_grid(os.path.join(out, f"nearfield-w{int(om)}.grid"), grid)
    rec = _record("near-field", f"w{int(om)}", cfg, "ddm", sol.iterations,
                  float("nan"), time.time() - t0, extra=f"grid={n}x{n}")
    write_records(os.path.join(out, "near-field.csv"), [rec], opts.get("force", False))
    return [rec]


def suite_custom(out, opts):
    """One ScatterConfig from the config file; DDM + CFIESK + far field."""
    cfg = opts["config"]
    records = []
    rec, sol = _run_ddm("custom", "run", cfg)
    records.append(rec)
    write_farfield(os.path.join(out, "custom-farfield.csv"), sol.far_field())
    if opts.get("cfiesk", True) and cfg.N0 <= 2048:
        records.append(_run_cfiesk("custom", "run", cfg)[0])
    write_records(os.path.join(out, "custom.csv"), records, opts.get("force", False))
    return records


SUITES = {
    "table-accuracy": suite_table_accuracy,
    "table-square": suite_table_square,
    "table-lshape": suite_table_lshape,
    "table-nonconforming": suite_table_nonconforming,
    "table-inner-iters": suite_table_inner_iters,
    "fig-eigenvalues": suite_fig_eigenvalues,
    "fig-pade-sweep": suite_fig_pade,
    "fig-subdomain-scaling": suite_fig_subdomains,
    "table-coated": suite_table_coated,
    "near-field": suite_near_field,
    "custom": suite_custom,
}


def run_suite(name, out, opts=None):
    """Run one named suite; returns (records, converged_flag)."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    os.makedirs(out, exist_ok=True)
    opts = dict(opts or {})
    t0 = time.time()
    ok = True
    try:
        records = SUITES[name](out, opts)
        ok = all(r.iterations >= 0 for r in records)
    except GmresStagnation:
        traceback.print_exc()
        records = []
        ok = False
    write_meta(os.path.join(out, f"{name}-meta.json"), {
        "suite": name, "schema_version": "1",
        "elapsed_s": round(time.time() - t0, 3),
        "options": {k: repr(v) for k, v in opts.items()},
        "converged": ok, "runs": len(records),
    })
    return records, ok

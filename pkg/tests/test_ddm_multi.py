import numpy as np
import pytest

from helmddm import geometry as geom
from helmddm.ddm import build_ddm, solve_ddm
from helmddm.ddm_multi import build_ddm_multi, solve_ddm_multi
from helmddm.scattering import ScatterConfig, farfield_error, mie_transmission

BASE = ScatterConfig(geometry="circle", size=1.0, omega=2.0, eps1=4.0,
                     N0=128, family="Z", tol=1e-8, max_iter=2000,
                     cutoff_width=0.1, oversample=False)


def test_degenerate_partition_delegates():
    cfg = BASE.with_(scheme="none", tol=1e-8)
    s_multi = solve_ddm_multi(cfg)
    s_two = solve_ddm(build_ddm(cfg))
    assert s_multi.iterations == s_two.iterations


def test_half_circle_matches_mie():
    sol = solve_ddm_multi(BASE.with_(scheme="half-circle"))
    mie = mie_transmission(1.0, 2.0, (1.0, 4.0), (1.0, 1.0))
    assert farfield_error(sol.far_field(), mie.far_field()) < 2e-2
    unsplit = solve_ddm(build_ddm(BASE.with_(scheme="none")), tol=1e-8)
    assert sol.iterations > unsplit.iterations


def test_exact_traces_are_fixed_point():
    """Mie traces satisfy the multi-subdomain exchange system."""
    from helmddm.ddm_multi import _apply_multi
    cfg = BASE.with_(scheme="half-circle")
    sysm = build_ddm_multi(cfg)
    mie = mie_transmission(1.0, 2.0, (1.0, 4.0), (1.0, 1.0))

    def grad(fn, pts, h=1e-6):
        gx = (fn(pts + [h, 0]) - fn(pts - [h, 0])) / (2 * h)
        gy = (fn(pts + [0, h]) - fn(pts - [0, h])) / (2 * h)
        return gx, gy

    F = np.zeros(sysm.n_unknowns, dtype=complex)
    for j, mesh in enumerate(sysm.meshes):
        u1 = mie.interior_field(mesh.points)
        gx, gy = grad(mie.interior_field, mesh.points)
        dn = gx * mesh.normals[:, 0] + gy * mesh.normals[:, 1]
        F[sysm.blocks[j][2]] = mesh.jac * dn + sysm.z_int[j].eff(True) @ u1
    me = sysm.ext_mesh
    u0 = mie.exterior_scattered(me.points)
    gx, gy = grad(mie.exterior_scattered, me.points)
    dn0 = -(gx * me.normals[:, 0] + gy * me.normals[:, 1])
    F[sysm.blocks[-1][2]] = me.jac * dn0 + me.jac * (sysm.z_ext_sum @ u0)
    res = _apply_multi(sysm, F) - sysm.g
    assert np.abs(res).max() < 1e-4 * np.abs(F).max()


def test_quarter_circle_count_exceeds_half():
    s2 = solve_ddm_multi(BASE.with_(scheme="half-circle", tol=1e-4))
    s4 = solve_ddm_multi(BASE.with_(scheme="quarter-circle", tol=1e-4))
    assert s4.iterations > s2.iterations


def test_za_family_runs_without_cutoffs():
    sol = solve_ddm_multi(BASE.with_(scheme="half-circle", family="Za", tol=1e-4))
    mie = mie_transmission(1.0, 2.0, (1.0, 4.0), (1.0, 1.0))
    assert farfield_error(sol.far_field(), mie.far_field()) < 5e-2


def test_localized_operator_annihilates_off_arc_density():
    cfg = BASE.with_(scheme="half-circle")
    part = geom.subdivide_domain(cfg.curve(), "half-circle")
    sysm = build_ddm_multi(cfg, part)
    mesh0 = sysm.meshes[0]
    z = sysm.z_int[0]
    # density supported away from both interface arcs (middle of the arc
    # panel is inside an arc, so use a single interior node of panel 0 with
    # the cutoff zeroed region of panel 1): place support at nodes where
    # every cutoff vanishes
    chi_total = np.zeros(mesh0.N)
    for arc in part.interfaces:
        if arc.side_a[0] == 0:
            from helmddm.transmission import CutoffFunction
            chi_total += CutoffFunction.build(mesh0, arc.side_a[1],
                                              cfg.cutoff_width).values
    dead = np.where(chi_total == 0)[0]
    assert dead.size > 0
    dens = np.zeros(mesh0.N, dtype=complex)
    dens[dead] = 1.0
    assert np.abs(z.matrix @ dens).max() < 1e-12


def test_lshape3_partition_runs():
    cfg = ScatterConfig(geometry="l-shape", size=4.0, omega=1.0, eps1=4.0,
                        N0=96, family="Z", tol=1e-4, max_iter=2000,
                        scheme="lshape3", cutoff_width=0.1, oversample=False)
    sol = solve_ddm_multi(cfg)
    assert sol.iterations < 400
    assert np.isfinite(np.abs(sol.far_field().values).max())

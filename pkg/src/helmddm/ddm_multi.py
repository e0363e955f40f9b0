"""Multi-subdomain DDM with cutoff-localized transmission operators.

The interior domain splits into non-overlapping subdomains meeting at cross
points; each interface arc is one shared panel, meshed identically from
both sides.  Unknowns are per-arc weighted Robin blocks in subdomain-major
order, followed by the exterior block on Gamma.  Transmission operators on
open arcs are cutoff-sandwiched hypersingular/multiplier operators of the
arc's owners (per-arc sandwiches when a subdomain touches Gamma on several
arcs); the scalar family needs no blending.

A degenerate single-subdomain partition delegates to the two-domain solver
so the counts coincide exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geom
from .fourier import multiplier_matrix, sqrt_symbol
from .geometry import EXTERIOR, matched_arc_indices, mesh_partition
from .linalg import DenseOperator, gmres
from .rtr import build_rtr
from .scattering import far_field, incident_trace
from .transmission import CutoffFunction, TransmissionOp, build_transmission

TWO_PI = 2.0 * np.pi


def _zero_op(mesh):
    return TransmissionOp(family="zero", mesh=mesh, kappa=0.0, alpha=0.0,
                          matrix=np.zeros((mesh.N, mesh.N), dtype=complex))


def _scatter_matrix(mesh_from, idx_from, mesh_to, idx_to):
    """0/1 transplant matrix moving matched arc nodes between meshes."""
    X = np.zeros((mesh_to.N, mesh_from.N))
    X[idx_to, idx_from] = 1.0
    return X


@dataclass
class ArcRecord:
    interface: object
    dom_a: int
    panel_a: int
    dom_b: int
    panel_b: int
    idx_a: np.ndarray     # node indices in owner a's mesh
    idx_b: np.ndarray     # matched order in owner b's mesh


@dataclass
class MultiDdmSystem:
    config: object
    partition: object
    meshes: list          # interior subdomain meshes
    ext_mesh: object
    arcs: list            # ArcRecord list
    solvers: list         # per-subdomain RtR maps (impedance solvers)
    ext_solver: object
    z_int: list           # localized Z_{1j} per subdomain
    z_ext_arc: dict       # (j, panel on Gamma) -> localized Z_{0j,arc} on Gamma
    z_ext_sum: np.ndarray
    blocks: list          # (kind, meta, slice) unknown layout
    n_unknowns: int
    g: np.ndarray


def _localized_interior_z(config, part, j, meshes, ext_mesh):
    """Z_{1j}: cutoff-sandwiched sum over the subdomain's interface arcs."""
    mesh_j = meshes[j]
    a0, a1 = config.alpha
    kap0, kap1 = config.kappa(0), config.kappa(1)
    fam = config.family
    if fam == "Za":
        diag = np.zeros(mesh_j.N, dtype=complex)
        for arc in part.interfaces:
            if arc.side_a[0] == j:
                idx = mesh_j.nodes_in_panels([arc.side_a[1]])
                opp_ext = arc.side_b[0] == EXTERIOR
                diag[idx] = -1j * (a0 * kap0 if opp_ext else a1 * kap1)
            elif arc.side_b[0] == j:
                idx = mesh_j.nodes_in_panels([arc.side_b[1]])
                diag[idx] = -1j * a1 * kap1
        return TransmissionOp(family="Za", mesh=mesh_j, kappa=kap1, alpha=a1,
                              matrix=np.diag(diag))
    if fam not in ("Z", "ZPS"):
        raise ValueError(f"family {fam!r} unsupported for localized operators")

    def core(mesh, kappa):
        if fam == "ZPS":
            return multiplier_matrix(sqrt_symbol(kappa), mesh)
        return build_transmission("Z", mesh, kappa, 1.0,
                                  oversample=config.oversample).matrix / (-2.0)

    mat = np.zeros((mesh_j.N, mesh_j.N), dtype=complex)
    for arc in part.interfaces:
        if arc.side_a[0] == j:
            panel_j, other = arc.side_a[1], arc.side_b
        elif arc.side_b[0] == j:
            panel_j, other = arc.side_b[1], arc.side_a
        else:
            continue
        chi = CutoffFunction.build(mesh_j, panel_j, config.cutoff_width)
        if other[0] == EXTERIOR:
            # exterior-facing arc: blend the Gamma operator at kappa_0
            idx_j, idx_o = matched_arc_indices(mesh_j, panel_j, ext_mesh,
                                               other[1], arc.reversed)
            X_to = _scatter_matrix(mesh_j, idx_j, ext_mesh, idx_o)
            X_back = _scatter_matrix(ext_mesh, idx_o, mesh_j, idx_j)
            Ncore = core(ext_mesh, kap0)
            coeff = -2.0 * a0
        else:
            mesh_o = meshes[other[0]]
            idx_j, idx_o = matched_arc_indices(mesh_j, panel_j, mesh_o,
                                               other[1], arc.reversed)
            X_to = _scatter_matrix(mesh_j, idx_j, mesh_o, idx_o)
            X_back = _scatter_matrix(mesh_o, idx_o, mesh_j, idx_j)
            Ncore = core(mesh_o, kap1)
            coeff = -2.0 * a1
        term = chi.values[:, None] * (X_back @ (Ncore @ X_to)) * chi.values[None, :]
        mat += coeff * term
    return TransmissionOp(family=fam, mesh=mesh_j, kappa=kap1, alpha=a1,
                          matrix=mat, parametrized=(fam == "Z"))


def _localized_exterior_z(config, part, meshes, ext_mesh):
    """Z_{0j} per exterior arc (sandwich of the owner subdomain's operator)."""
    a1 = config.alpha[1]
    kap1 = config.kappa(1)
    fam = config.family
    per_arc = {}
    total = np.zeros((ext_mesh.N, ext_mesh.N), dtype=complex)
    for arc in part.interfaces:
        if arc.side_b[0] != EXTERIOR:
            continue
        j, panel_j = arc.side_a
        panel_e = arc.side_b[1]
        if fam == "Za":
            idx = ext_mesh.nodes_in_panels([panel_e])
            term = np.zeros((ext_mesh.N, ext_mesh.N), dtype=complex)
            term[idx, idx] = -1j * a1 * kap1
        else:
            chi = CutoffFunction.build(ext_mesh, panel_e, config.cutoff_width)
            mesh_j = meshes[j]
            idx_j, idx_e = matched_arc_indices(mesh_j, panel_j, ext_mesh,
                                               panel_e, arc.reversed)
            X_to = _scatter_matrix(ext_mesh, idx_e, mesh_j, idx_j)
            X_back = _scatter_matrix(mesh_j, idx_j, ext_mesh, idx_e)
            if fam == "ZPS":
                core = multiplier_matrix(sqrt_symbol(kap1), mesh_j)
            else:
                core = build_transmission("Z", mesh_j, kap1, 1.0,
                                          oversample=config.oversample).matrix / (-2.0)
            term = -2.0 * a1 * (chi.values[:, None]
                                * (X_back @ (core @ X_to)) * chi.values[None, :])
        per_arc[(j, panel_e)] = term
        total += term
    return per_arc, total


def build_ddm_multi(config, partition=None):
    """Assemble meshes, localized operators, solvers, and the right side."""
    if partition is None:
        curve = config.curve()
        partition = geom.subdivide_domain(curve, config.scheme, size=config.size)
    part = partition
    meshes, ext_mesh = mesh_partition(part, config.N0, config.grading_degree)
    k0, k1 = config.k
    a0, a1 = config.alpha

    z_int = [_localized_interior_z(config, part, j, meshes, ext_mesh)
             for j in range(part.n_subdomains)]
    z_ext_arc, z_ext_sum = _localized_exterior_z(config, part, meshes, ext_mesh)
    z_ext = TransmissionOp(family=config.family, mesh=ext_mesh,
                           kappa=config.kappa(0), alpha=a0, matrix=z_ext_sum,
                           parametrized=(config.family == "Z"))

    solvers = [build_rtr(config.interior_formulation, "interior", meshes[j],
                         k1, a1, z_int[j], _zero_op(meshes[j]),
                         kappa_reg=config.kappa(1), oversample=config.oversample)
               for j in range(part.n_subdomains)]
    ext_solver = build_rtr(config.exterior_formulation, "exterior", ext_mesh,
                           k0, a0, z_ext, _zero_op(ext_mesh),
                           kappa_reg=config.kappa(0), oversample=config.oversample)

    # unknown layout: per-subdomain full-boundary Robin blocks, then Gamma
    blocks, n = [], 0
    for j, m in enumerate(meshes):
        blocks.append(("interior", j, slice(n, n + m.N)))
        n += m.N
    blocks.append(("exterior", None, slice(n, n + ext_mesh.N)))
    n += ext_mesh.N

    arcs = []
    for arc in part.interfaces:
        dom_a, pa = arc.side_a
        dom_b, pb = arc.side_b
        mesh_a = meshes[dom_a]
        mesh_b = ext_mesh if dom_b == EXTERIOR else meshes[dom_b]
        ia, ib = matched_arc_indices(mesh_a, pa, mesh_b, pb, arc.reversed)
        arcs.append(ArcRecord(interface=arc, dom_a=dom_a, panel_a=pa,
                              dom_b=dom_b, panel_b=pb, idx_a=ia, idx_b=ib))

    g = _build_rhs_multi(config, part, meshes, ext_mesh, z_int, z_ext_arc,
                         blocks, n, arcs)
    return MultiDdmSystem(config=config, partition=part, meshes=meshes,
                          ext_mesh=ext_mesh, arcs=arcs, solvers=solvers,
                          ext_solver=ext_solver, z_int=z_int,
                          z_ext_arc=z_ext_arc, z_ext_sum=z_ext_sum,
                          blocks=blocks, n_unknowns=n, g=g)


def _build_rhs_multi(config, part, meshes, ext_mesh, z_int, z_ext_arc,
                     blocks, n, arcs):
    k0 = config.k[0]
    a0 = config.alpha[0]
    d = config.direction
    g = np.zeros(n, dtype=complex)
    ue, dne = incident_trace(ext_mesh, k0, d)
    # exterior block: -(a0 |x'| dn0 uinc + Z0 uinc) arcwise (dn0 = -mesh normal)
    ge = a0 * ext_mesh.jac * dne
    for (j, panel_e), term in z_ext_arc.items():
        w = ext_mesh.jac if config.family == "Z" else 1.0
        ge = ge - w * (term @ ue)
    g[blocks[-1][2]] = ge
    # interior blocks: nonzero only on exterior-facing arcs
    for rec in arcs:
        if rec.dom_b != EXTERIOR:
            continue
        j = rec.dom_a
        mesh_j = meshes[j]
        uj, dnj = incident_trace(mesh_j, k0, d)
        w = mesh_j.jac if config.family == "Z" else 1.0
        zu = (w * (z_int[j].matrix @ uj)) if config.family == "Z" else z_int[j].matrix @ uj
        gj = a0 * mesh_j.jac * dnj + zu
        g[blocks[j][2]][rec.idx_a] = gj[rec.idx_a]
    return g


@dataclass
class MultiDdmSolution:
    system: MultiDdmSystem
    f: np.ndarray
    iterations: int
    history: list

    def exterior_cauchy(self):
        sys = self.system
        fe = self.f[sys.blocks[-1][2]]
        return sys.ext_solver.cauchy_data(fe)

    def far_field(self, n_dir=None):
        sys = self.system
        cfg = sys.config
        n_dir = n_dir or cfg.far_directions
        u0, q0 = self.exterior_cauchy()
        return far_field(sys.ext_mesh, u0, -q0 / cfg.alpha[0], cfg.k[0], n_dir)


def _apply_multi(sys, F):
    """One application of (I + S) in the per-arc exchange form.

    Matched nodes coincide physically, but each mesh parametrizes the shared
    panel with its own speed (total node count over 2*pi), so transplanted
    weighted Neumann data carries the Jacobian ratio of the receiving to the
    sending mesh.
    """
    out = F.copy()
    cauchy = []
    for j, _ in enumerate(sys.meshes):
        cauchy.append(sys.solvers[j].cauchy_data(F[sys.blocks[j][2]]))
    u_e, q_e = sys.ext_solver.cauchy_data(F[sys.blocks[-1][2]])
    fam_Z = sys.config.family == "Z"

    def zapply(zmat, mesh, u):
        zu = zmat @ u
        return mesh.jac * zu if fam_Z else zu

    for rec in sys.arcs:
        j = rec.dom_a
        mesh_j = sys.meshes[j]
        u_j, q_j = cauchy[j]
        if rec.dom_b == EXTERIOR:
            me = sys.ext_mesh
            ratio_je = mesh_j.jac[rec.idx_a] / me.jac[rec.idx_b]
            # incoming for subdomain j on this arc: q0 - Z_{1j} u0
            u0_on_j = np.zeros(mesh_j.N, dtype=complex)
            u0_on_j[rec.idx_a] = u_e[rec.idx_b]
            inc_j = (q_e[rec.idx_b] * ratio_je
                     - zapply(sys.z_int[j].matrix, mesh_j, u0_on_j)[rec.idx_a])
            out[sys.blocks[j][2]][rec.idx_a] += inc_j
            # incoming for the exterior on this arc: q_j - Z_{0j} u_j
            uj_on_e = np.zeros(me.N, dtype=complex)
            uj_on_e[rec.idx_b] = u_j[rec.idx_a]
            term = sys.z_ext_arc[(j, rec.panel_b)]
            inc_e = (q_j[rec.idx_a] / ratio_je
                     - zapply(term, me, uj_on_e)[rec.idx_b])
            out[sys.blocks[-1][2]][rec.idx_b] += inc_e
        else:
            ell = rec.dom_b
            mesh_l = sys.meshes[ell]
            u_l, q_l = cauchy[ell]
            ratio_jl = mesh_j.jac[rec.idx_a] / mesh_l.jac[rec.idx_b]
            # incoming for j from ell
            ul_on_j = np.zeros(mesh_j.N, dtype=complex)
            ul_on_j[rec.idx_a] = u_l[rec.idx_b]
            inc_j = (q_l[rec.idx_b] * ratio_jl
                     - zapply(sys.z_int[j].matrix, mesh_j, ul_on_j)[rec.idx_a])
            out[sys.blocks[j][2]][rec.idx_a] += inc_j
            # incoming for ell from j
            uj_on_l = np.zeros(mesh_l.N, dtype=complex)
            uj_on_l[rec.idx_b] = u_j[rec.idx_a]
            inc_l = (q_j[rec.idx_a] / ratio_jl
                     - zapply(sys.z_int[ell].matrix, mesh_l, uj_on_l)[rec.idx_b])
            out[sys.blocks[ell][2]][rec.idx_b] += inc_l
    return out


def solve_ddm_multi(config, partition=None, tol=None, max_iter=None):
    """Outer GMRES on the per-arc Robin exchange system.

    Degenerate single-subdomain partitions delegate to the two-domain
    solver so counts coincide exactly.
    """
    if partition is None and config.scheme == "none":
        from .ddm import build_ddm, solve_ddm
        return solve_ddm(build_ddm(config), tol=tol, max_iter=max_iter)
    if partition is not None and partition.n_subdomains == 1 \
            and config.scheme == "none":
        from .ddm import build_ddm, solve_ddm
        return solve_ddm(build_ddm(config), tol=tol, max_iter=max_iter)
    sys = build_ddm_multi(config, partition)
    tol = tol or config.tol
    max_iter = max_iter or config.max_iter
    op = DenseOperator(lambda F: _apply_multi(sys, F), sys.n_unknowns)
    x, its, hist = gmres(op, sys.g, tol=tol, max_iter=max_iter)
    return MultiDdmSolution(system=sys, f=x, iterations=its, history=hist)

"""Non-overlapping DDM solvers for the transmission problem.

Unknowns are *weighted* Robin traces f_j = alpha_j |x'| du_j/dn_j + Z_j u_j
(scattered field on the exterior side).  The two-domain solver runs either
on the full stacked system

    f_0 + P S1 f_1 = g_0,   f_1 + E S0 f_0 = g_1,

or on the reduced exterior system (the default)

    (I - P S1 E S0) f_0 = g_0 - P S1 g_1,

with Fourier-space transfer P, E between the conforming or non-conforming
grids.  Partially coated problems restrict the data to the Gamma_T nodes
and carry one extra exterior solve for the inhomogeneous PEC trace of the
incident field.  The multi-subdomain solver exchanges per-arc Robin blocks
with cutoff-localized transmission operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geom
from .fourier import make_transfers
from .linalg import DenseOperator, eig_dense, gmres
from .nystrom import eval_potential
from .rtr import build_rtr, build_rtr_coated
from .scattering import (ScatterConfig, far_field, incident_field,
                         incident_trace)
from .transmission import (CutoffFunction, TransmissionOp,
                           build_transmission, sandwich)

TWO_PI = 2.0 * np.pi


def transmission_for(config, j, mesh):
    """Transmission operator Z_j on a mesh (uses the opposite medium)."""
    ell = 1 - j
    return build_transmission(config.family, mesh, config.kappa(ell),
                              config.alpha[ell], side=j,
                              pade_order=config.pade_order,
                              pade_theta=config.pade_theta,
                              oversample=config.oversample)


# ---------------------------------------------------------------------------
# two-domain solver
# ---------------------------------------------------------------------------

@dataclass
class DdmSystem:
    config: ScatterConfig
    mesh0: object
    mesh1: object
    rtr0: object
    rtr1: object
    g0: np.ndarray
    g1: np.ndarray
    extend: object            # N0 -> N1
    project: object           # N1 -> N0
    mode: str = "reduced"

    @property
    def t_nodes(self):
        return self.rtr0.restriction


@dataclass
class DdmSolution:
    system: DdmSystem
    f0: np.ndarray
    f1: np.ndarray
    iterations: int
    history: list

    @property
    def config(self):
        return self.system.config

    def exterior_cauchy(self):
        """(u0, q0) of the scattered field; q0 = alpha0 |x'| du0/dn0 full-curve."""
        sys = self.system
        if sys.t_nodes is None:
            return sys.rtr0.cauchy_data(self.f0)
        cfg = sys.config
        mesh = sys.mesh0
        u = sys.rtr0.robin_to_dirichlet @ self.f0 + sys._u_part
        _, dn_inc = incident_trace(mesh, cfg.k[0], cfg.direction)
        psi_full = np.zeros(mesh.N, dtype=complex)
        psi_full[sys.t_nodes] = self.f0
        pec = np.setdiff1d(np.arange(mesh.N), sys.t_nodes)
        psi_full[pec] = (cfg.alpha[0] * mesh.jac * dn_inc)[pec]
        q = psi_full - sys.rtr0.z_out.eff(sys.rtr0.weighted) @ u
        return u, q

    def far_field(self, n_dir=None):
        sys = self.system
        cfg = sys.config
        n_dir = n_dir or cfg.far_directions
        u0, q0 = self.exterior_cauchy()
        # far-field formula wants |x'| du/dn with n pointing outward; q0 uses n0
        return far_field(sys.mesh0, u0, -q0 / cfg.alpha[0], cfg.k[0], n_dir)

    def interior_cauchy(self):
        return self.system.rtr1.cauchy_data(self.f1)

    # near-field evaluators (Green representation from Cauchy data)
    @property
    def mesh(self):
        return self.system.mesh0

    def exterior_total(self, points):
        cfg = self.config
        u0, q0 = self.exterior_cauchy()
        mesh = self.system.mesh0
        dn_nu = -q0 / (cfg.alpha[0] * mesh.jac)           # du0/d(nu)
        dl = eval_potential("DL", mesh, cfg.k[0], u0, points, check_distance=False)
        sl = eval_potential("SL", mesh, cfg.k[0], dn_nu, points, check_distance=False)
        return dl.values - sl.values + incident_field(points, cfg.k[0], cfg.direction)

    def interior_cauchy_full(self):
        """(u1, q1) with q1 on the full curve (zero Neumann on any PEC part)."""
        sys = self.system
        u1, q1 = sys.rtr1.cauchy_data(self.f1)
        if sys.t_nodes is not None:
            qfull = np.zeros(sys.mesh1.N, dtype=complex)
            qfull[sys.rtr1.restriction] = q1
            q1 = qfull
        return u1, q1

    def interior_total(self, points):
        cfg = self.config
        sys = self.system
        u1, q1 = self.interior_cauchy_full()
        mesh = sys.mesh1
        dn_nu = q1 / (cfg.alpha[1] * mesh.jac)
        sl = eval_potential("SL", mesh, cfg.k[1], dn_nu, points, check_distance=False)
        dl = eval_potential("DL", mesh, cfg.k[1], u1, points, check_distance=False)
        return sl.values - dl.values


def _coated_t_nodes(mesh):
    panels = [i for i, p in enumerate(mesh.curve.panels) if p.label != "PEC"]
    return mesh.nodes_in_panels(panels)


def _coated_z(config, j, mesh):
    """Transmission operator supported on Gamma_T (sandwich or restriction)."""
    t_panels = [i for i, p in enumerate(mesh.curve.panels) if p.label != "PEC"]
    if config.family == "Za":
        ell = 1 - j
        mat = np.zeros((mesh.N, mesh.N), dtype=complex)
        idx = mesh.nodes_in_panels(t_panels)
        mat[idx, idx] = -1j * config.alpha[ell] * config.kappa(ell)
        return TransmissionOp(family="Za", mesh=mesh, kappa=config.kappa(ell),
                              alpha=config.alpha[ell], matrix=mat, side=j)
    z = transmission_for(config, j, mesh)
    chi = np.zeros(mesh.N)
    for p in t_panels:
        chi_p = CutoffFunction.build(mesh, p, config.cutoff_width)
        chi = np.maximum(chi, chi_p.values)
    chi_obj = CutoffFunction(mesh=mesh, panel=-1, width=config.cutoff_width, values=chi)
    z.matrix = sandwich(chi_obj, z.matrix)
    z.cutoff = chi_obj
    return z


def build_ddm(config):
    """Assemble meshes, transmission operators, RtR maps, and the right side."""
    curve = config.curve()
    mesh0 = geom.build_graded_mesh(curve, config.N0, config.grading_degree)
    if config.N1 == config.N0:
        mesh1 = mesh0
    else:
        mesh1 = geom.build_graded_mesh(curve, config.N1, config.grading_degree)
    k0, k1 = config.k
    a0, a1 = config.alpha
    coated = config.coated
    if coated:
        if config.N0 != config.N1:
            raise ValueError("coated solver requires conforming meshes")
        z0 = _coated_z(config, 0, mesh0)
        z1 = _coated_z(config, 1, mesh1)
        t0 = _coated_t_nodes(mesh0)
        rtr0 = build_rtr_coated(config.exterior_formulation, "exterior", mesh0, t0,
                                k0, a0, z0, z1, kappa_reg=config.kappa(0),
                                oversample=config.oversample)
        rtr1 = build_rtr_coated(config.interior_formulation, "interior", mesh1, t0,
                                k1, a1, z1, z0, kappa_reg=config.kappa(1),
                                oversample=config.oversample)
    else:
        z0 = transmission_for(config, 0, mesh0)
        z1 = transmission_for(config, 1, mesh1)
        rtr0 = build_rtr(config.exterior_formulation, "exterior", mesh0,
                         k0, a0, z0, z1 if mesh1 is mesh0 else
                         build_transmission(config.family, mesh0, config.kappa(0),
                                            a0, side=1, pade_order=config.pade_order,
                                            pade_theta=config.pade_theta,
                                            oversample=config.oversample),
                         kappa_reg=config.kappa(0), oversample=config.oversample)
        rtr1 = build_rtr(config.interior_formulation, "interior", mesh1,
                         k1, a1, z1, z0 if mesh1 is mesh0 else
                         build_transmission(config.family, mesh1, config.kappa(1),
                                            a1, side=0, pade_order=config.pade_order,
                                            pade_theta=config.pade_theta,
                                            oversample=config.oversample),
                         kappa_reg=config.kappa(1), oversample=config.oversample)

    g0, g1, u_part = build_rhs(config, mesh0, mesh1, rtr0, rtr1)
    E, P = make_transfers(mesh0, mesh1)
    sys = DdmSystem(config=config, mesh0=mesh0, mesh1=mesh1, rtr0=rtr0, rtr1=rtr1,
                    g0=g0, g1=g1, extend=E, project=P)
    if coated:
        sys._u_part = u_part
    return sys


def build_rhs(config, mesh0, mesh1, rtr0, rtr1):
    """Weighted Robin data of the incident field (and the PEC correction).

    g0 = -|x'| (alpha0 d(uinc)/dn0 + Z0 uinc),
    g1 = +|x'| (-alpha0 d(uinc)/dn0 + Z1 uinc), restricted to Gamma_T coated.
    """
    k0 = config.k[0]
    a0 = config.alpha[0]
    d = config.direction
    u0i, dn0i = incident_trace(mesh0, k0, d)   # dn w.r.t. mesh normal = -n0
    u1i, dn1i = incident_trace(mesh1, k0, d)
    Z0 = rtr0.z_out.eff(rtr0.weighted)
    Z1 = rtr1.z_out.eff(rtr1.weighted)
    g0 = a0 * mesh0.jac * dn0i - Z0 @ u0i
    g1 = a0 * mesh1.jac * dn1i + Z1 @ u1i
    u_part = None
    if rtr0.restriction is not None:
        # exterior particular solve: zero Robin data on Gamma_T, the incident
        # Neumann trace on Gamma_PEC (Z vanishes there, so this is a Neumann
        # condition); shifts the g1 block of the fixed-point system.
        t0 = rtr0.restriction
        psi_p = np.zeros(mesh0.N, dtype=complex)
        pec = np.setdiff1d(np.arange(mesh0.N), t0)
        psi_p[pec] = (a0 * mesh0.jac * dn0i)[pec]        # alpha0 |x'| (-dn0 uinc)
        u_part = rtr0._full_robin_to_dirichlet @ psi_p
        c = psi_p - (Z0 + rtr0.z_in.eff(rtr0.weighted)) @ u_part
        g0 = g0[t0]
        g1 = g1[rtr1.restriction] - c[t0]
    return g0, g1, u_part


def solve_ddm(system, tol=None, max_iter=None, mode=None):
    """GMRES solve of the DDM system; returns a DdmSolution with counts."""
    cfg = system.config
    tol = tol or cfg.tol
    max_iter = max_iter or cfg.max_iter
    mode = mode or system.mode
    S0, S1 = system.rtr0.matrix, system.rtr1.matrix
    E, P = system.extend, system.project
    conforming = system.mesh0.N == system.mesh1.N and system.t_nodes is None

    if mode == "reduced":
        if system.t_nodes is not None or conforming:
            apply = lambda f0: f0 - S1 @ (S0 @ f0)
            rhs = system.g0 - S1 @ system.g1
        else:
            apply = lambda f0: f0 - P(S1 @ E(S0 @ f0))
            rhs = system.g0 - P(S1 @ system.g1)
        n = len(rhs)
        x, its, hist = gmres(DenseOperator(apply, n), rhs, tol=tol, max_iter=max_iter)
        f0 = x
        if system.t_nodes is not None or conforming:
            f1 = system.g1 - S0 @ f0
        else:
            f1 = system.g1 - E(S0 @ f0)
    else:
        n0, n1 = len(system.g0), len(system.g1)

        def apply(F):
            f0, f1 = F[:n0], F[n0:]
            if system.t_nodes is not None or conforming:
                return np.concatenate([f0 + S1 @ f1, f1 + S0 @ f0])
            return np.concatenate([f0 + P(S1 @ f1), f1 + E(S0 @ f0)])

        rhs = np.concatenate([system.g0, system.g1])
        x, its, hist = gmres(DenseOperator(apply, n0 + n1), rhs, tol=tol,
                             max_iter=max_iter)
        f0, f1 = x[:n0], x[n0:]
    return DdmSolution(system=system, f0=f0, f1=f1, iterations=its, history=hist)


def iteration_operator(system):
    """Dense reduced iteration operator I - P S1 E S0."""
    S0, S1 = system.rtr0.matrix, system.rtr1.matrix
    if system.mesh0.N == system.mesh1.N or system.t_nodes is not None:
        M = S1 @ S0
    else:
        Em = system.extend.matrix()
        Pm = system.project.matrix()
        M = Pm @ S1 @ Em @ S0
    return np.eye(M.shape[0], dtype=complex) - M


def iteration_operator_spectrum(system):
    return eig_dense(iteration_operator(system))


def solve_transmission(config, mode="reduced", tol=None):
    """Convenience wrapper: build and solve in one call."""
    system = build_ddm(config)
    system.mode = mode
    return solve_ddm(system, tol=tol)

"""Second-kind combined-field boundary integral solver for the plain and
partially coated transmission problems.

Fields are represented as u_j = SL_j v + (-1)^j alpha_j^{-1} DL_j p with the
double layer taken w.r.t. each domain's own outward normal.  In this
module's fixed counterclockwise-normal convention that reads

    u_j = SL_j v - alpha_j^{-1} DL_j p          (both j),

and the transmission/PEC conditions collocate into a dense 2N x 2N system
over the densities (p, v).  The N_0 - N_1 and S_1 - S_0 blocks come from
single-pass difference kernels (weakly singular), never from subtracting
two singular assemblies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geom
from .linalg import DenseOperator, gmres
from .nystrom import assemble_bio, assemble_bio_difference, eval_potential
from .scattering import FarField, incident_field, incident_trace

TWO_PI = 2.0 * np.pi


@dataclass
class CfieskSystem:
    config: object
    mesh: object
    matrix: np.ndarray
    rhs: np.ndarray
    coated: bool
    t_nodes: object = None


@dataclass
class CfieskSolution:
    system: CfieskSystem
    p: np.ndarray
    v: np.ndarray
    iterations: int
    history: list

    @property
    def config(self):
        return self.system.config

    @property
    def mesh(self):
        return self.system.mesh

    def exterior_cauchy(self):
        """Scattered-field Cauchy data (u0, alpha0 |x'| du0/dn0) on Gamma."""
        cfg, mesh = self.config, self.mesh
        k0 = cfg.k[0]
        a0 = cfg.alpha[0]
        S0 = assemble_bio("S", mesh, k0, oversample=cfg.oversample).matrix
        K0 = assemble_bio("K", mesh, k0, oversample=cfg.oversample).matrix
        KT0 = assemble_bio("KT", mesh, k0, oversample=cfg.oversample).matrix
        N0 = assemble_bio("N", mesh, k0, oversample=cfg.oversample).matrix
        I = np.eye(mesh.N)
        u0 = S0 @ self.v - (0.5 * I + K0) @ self.p / a0
        dnu = (-0.5 * I + KT0) @ self.v - (N0 @ self.p) / a0   # d/d(nu)
        return u0, -a0 * mesh.jac * dnu

    def far_field(self, n_dir=None):
        """Pattern directly from the densities (no trace re-evaluation)."""
        cfg, mesh = self.config, self.mesh
        n_dir = n_dir or cfg.far_directions
        k0 = cfg.k[0]
        angles = TWO_PI * np.arange(n_dir) / n_dir
        xh = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        c = np.exp(1j * np.pi / 4.0) / np.sqrt(8.0 * np.pi * k0)
        m = np.stack([mesh.d1[:, 1], -mesh.d1[:, 0]], axis=1)
        phase = np.exp(-1j * k0 * (xh @ mesh.points.T))
        dn_phase = (-1j * k0) * (xh @ m.T) * phase
        w = TWO_PI / mesh.N
        vals = c * w * (phase @ (self.v * mesh.jac)
                        - (dn_phase @ self.p) / cfg.alpha[0])
        return FarField(angles=angles, values=vals, k0=float(k0))

    # near-field evaluators for the shared grid renderer
    def exterior_total(self, points):
        cfg, mesh = self.config, self.mesh
        k0 = cfg.k[0]
        sl = eval_potential("SL", mesh, k0, self.v, points, check_distance=False)
        dl = eval_potential("DL", mesh, k0, self.p, points, check_distance=False)
        return (sl.values - dl.values / cfg.alpha[0]
                + incident_field(points, k0, cfg.direction))

    def interior_total(self, points):
        cfg, mesh = self.config, self.mesh
        k1 = cfg.k[1]
        sl = eval_potential("SL", mesh, k1, self.v, points, check_distance=False)
        dl = eval_potential("DL", mesh, k1, self.p, points, check_distance=False)
        return sl.values - dl.values / cfg.alpha[1]


def assemble_cfiesk(config, mesh=None):
    """Dense 2N x 2N system over the densities (p, v)."""
    if mesh is None:
        mesh = geom.build_graded_mesh(config.curve(), config.N0,
                                      config.grading_degree)
    ov = config.oversample
    k0, k1 = config.k
    a0, a1 = config.alpha
    n = mesh.N
    I = np.eye(n)
    K0 = assemble_bio("K", mesh, k0, oversample=ov).matrix
    K1 = assemble_bio("K", mesh, k1, oversample=ov).matrix
    KT0 = assemble_bio("KT", mesh, k0, oversample=ov).matrix
    KT1 = assemble_bio("KT", mesh, k1, oversample=ov).matrix
    if k0 == k1:
        Sd = np.zeros((n, n), dtype=complex)
        Nd = np.zeros((n, n), dtype=complex)
    else:
        Sd = assemble_bio_difference("S", mesh, k1, k0, oversample=ov).matrix
        Nd = assemble_bio_difference("N", mesh, k0, k1, oversample=ov).matrix
    uinc, dninc = incident_trace(mesh, k0, config.direction)

    App = 0.5 * (1.0 / a0 + 1.0 / a1) * I + K0 / a0 - K1 / a1
    Apv = Sd
    Avp = Nd
    Avv = 0.5 * (a0 + a1) * I - a0 * KT0 + a1 * KT1
    if not config.coated:
        matrix = np.block([[App, Apv], [Avp, Avv]])
        rhs = np.concatenate([uinc, a0 * dninc])
        return CfieskSystem(config=config, mesh=mesh, matrix=matrix, rhs=rhs,
                            coated=False)

    # coated: Gamma_T rows keep the transmission equations, Gamma_PEC rows
    # collocate the two zero-Neumann conditions
    t_panels = [i for i, p in enumerate(mesh.curve.panels) if p.label != "PEC"]
    t = mesh.nodes_in_panels(t_panels)
    pec = np.setdiff1d(np.arange(n), t)
    N0 = assemble_bio("N", mesh, k0, oversample=ov).matrix
    N1 = assemble_bio("N", mesh, k1, oversample=ov).matrix
    # exterior PEC: d/dn0 (u0 + uinc) = 0  ->  v/2 - KT0 v + N0 p / a0 = dn(nu) uinc
    ext_p = N0 / a0
    ext_v = 0.5 * I - KT0
    # interior PEC: d/dn1 u1 = 0  ->  v/2 + KT1 v - N1 p / a1 = 0
    int_p = -N1 / a1
    int_v = 0.5 * I + KT1
    matrix = np.block([
        [App[t], Apv[t]],
        [ext_p[pec], ext_v[pec]],
        [Avp[t], Avv[t]],
        [int_p[pec], int_v[pec]],
    ])
    rhs = np.concatenate([uinc[t], dninc[pec], a0 * dninc[t],
                          np.zeros(len(pec), dtype=complex)])
    return CfieskSystem(config=config, mesh=mesh, matrix=matrix, rhs=rhs,
                        coated=True, t_nodes=t)


def solve_cfiesk(system, tol=None, max_iter=None):
    cfg = system.config
    tol = tol or cfg.tol
    max_iter = max_iter or cfg.max_iter
    x, its, hist = gmres(DenseOperator.from_matrix(system.matrix), system.rhs,
                         tol=tol, max_iter=max_iter)
    n = system.mesh.N
    if system.coated:
        t = system.t_nodes
        pec = np.setdiff1d(np.arange(n), t)
        p = np.empty(n, dtype=complex)
        v = np.empty(n, dtype=complex)
        # unknown layout mirrors the row layout: (p, v) stay full-curve nodal
        p[:] = x[:n]
        v[:] = x[n:]
    else:
        p, v = x[:n], x[n:]
    return CfieskSolution(system=system, p=p, v=v, iterations=its, history=hist)


def solve_reference(config, refine=2.0, tol=1e-12):
    """Overkill CFIESK far-field reference at `refine` x the configured N."""
    ref_cfg = config.with_(N0=int(np.ceil(config.N0 * refine / 2) * 2),
                           N1=0, tol=tol)
    ref_cfg.N1 = ref_cfg.N0
    system = assemble_cfiesk(ref_cfg)
    return solve_cfiesk(system, tol=tol, max_iter=6000)

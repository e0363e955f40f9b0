"""Robin-to-Robin maps for interior and exterior impedance problems.

Three boundary-integral routes to the same map, selected by tag:

  B  Dirichlet-trace direct equation, one N x N inverse (cheapest; no
     exterior theory, guarded by a condition estimate);
  A  regularized combined equation with the complexified single layer,
     one N x N inverse, stable for the exterior side;
  C  two-by-two Cauchy system, a 2N x 2N inverse, stable for all
     impedance families (exterior variant carries the extra single-layer
     regularization row).

Maps act on *weighted* Robin data psi = alpha*|x'|*du/dn + Z_eff*u by
default, where Z_eff is the transmission operator as it enters the data:
|x'|-premultiplied for the BIO/differentiation-backed families (whose
weighted map is then exactly the Jacobian conjugation W S W^{-1}, keeping
their corner rows bounded), plain for the multiplier and scalar families.
Set weighted=False for the unweighted parametrized maps.  All operators
here are built w.r.t. the curve's own counterclockwise normal; the
exterior side flips the sign of K and K^T, which realizes the
own-outward-normal convention of the unbounded domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import multiplier_matrix, reciprocal_symbol, sqrt_symbol
from .linalg import DenseOperator, gmres, lu_factor, lu_solve
from .nystrom import assemble_bio

FORMULATIONS = ("A", "B", "C")


class RtRConditionError(RuntimeError):
    pass


@dataclass
class RtRMap:
    matrix: np.ndarray            # weighted Robin-in -> weighted Robin-out
    robin_to_dirichlet: np.ndarray
    mesh: object
    side: str
    formulation: str
    k: complex
    alpha: float
    z_out: object
    z_in: object
    weighted: bool = True
    restriction: object = None    # node indices when data lives on an arc subset

    @property
    def n(self):
        return self.matrix.shape[0]

    def __matmul__(self, data):
        return self.matrix @ data

    def robin_to_neumann(self, data):
        """Weighted Neumann trace alpha*|x'|*du/dn from Robin data."""
        return self.cauchy_data(data)[1]

    def cauchy_data(self, data):
        """(u, alpha*|x'|*du/dn) from Robin data.

        u always spans the full curve; the weighted Neumann trace comes back
        on the map's node set (the Gamma_T subset for coated maps).
        """
        u = self.robin_to_dirichlet @ data
        zu = self.z_out.eff(self.weighted) @ u
        if self.restriction is not None:
            zu = zu[self.restriction]
        return u, data - zu


def _sided_bios(mesh, k, side, oversample):
    sgn = 1.0 if side == "interior" else -1.0
    S = assemble_bio("S", mesh, k, oversample=oversample).matrix
    K = sgn * assemble_bio("K", mesh, k, oversample=oversample).matrix
    KT = sgn * assemble_bio("KT", mesh, k, oversample=oversample).matrix
    N = assemble_bio("N", mesh, k, oversample=oversample).matrix
    return S, K, KT, N


def _regularizer(mesh, kappa_reg, z_out, oversample):
    """S_{k+i sigma}, or the reciprocal-symbol multiplier for the PS family."""
    if getattr(z_out, "family", None) == "ZPS":
        return multiplier_matrix(reciprocal_symbol(sqrt_symbol(kappa_reg)), mesh)
    return assemble_bio("S", mesh, kappa_reg, oversample=oversample).matrix


def formulation_system(formulation, side, mesh, k, alpha, z_out,
                       kappa_reg=None, weighted=True, oversample=True):
    """System matrix M and data map G with u = M^{-1} G psi.

    psi is the Robin trace in the module's weighted encoding
    alpha*|x'|*du/dn + Z_eff*u (plain alpha*du/dn + Z*u when
    weighted=False).  For formulation C the pair acts on stacked
    (u, |x'| du/dn) unknowns and G maps psi into the stacked right-hand
    side; the caller extracts the u block.
    """
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown RtR formulation {formulation!r}")
    if side not in ("interior", "exterior"):
        raise ValueError(f"side must be interior/exterior, got {side!r}")
    S, K, KT, N = _sided_bios(mesh, k, side, oversample)
    n = mesh.N
    I = np.eye(n, dtype=complex)
    Z = z_out.eff(weighted)
    Winv = np.diag(1.0 / mesh.jac) if weighted else I
    SW = S @ Winv
    if formulation == "B":
        M = 0.5 * I + K + (SW @ Z) / alpha
        G = SW / alpha
        return M, G
    if formulation == "A":
        if kappa_reg is None:
            raise ValueError("formulation A needs the complexified wavenumber")
        Sk = assemble_bio("S", mesh, kappa_reg, oversample=oversample).matrix
        SkW = Sk @ Winv
        M = (0.5 * I + K + (SW @ Z) / alpha
             - 2.0 * (Sk @ N) + (SkW @ Z) / alpha
             - 2.0 * (Sk @ (KT @ (Winv @ Z))) / alpha)
        G = (SW + SkW - 2.0 * (Sk @ (KT @ Winv))) / alpha
        return M, G
    # formulation C: rows are (Neumann identity + impedance, Dirichlet
    # identity); the impedance identity reads (Z_eff/alpha) u + q = psi/alpha
    # in the weighted unknown q = |x'| du/dn, so it contributes q itself.
    row_u_1 = Z / alpha - N
    row_q_1 = I + (-0.5 * I + KT) @ Winv
    row_u_2 = 0.5 * I + K
    row_q_2 = -SW
    rhs_1 = I / alpha
    rhs_2 = np.zeros_like(I)
    if side == "exterior":
        if kappa_reg is None:
            raise ValueError("exterior formulation C needs the complexified wavenumber")
        R = _regularizer(mesh, kappa_reg, z_out, oversample)
        # add R*(impedance identity) to the Dirichlet row
        row_u_2 = row_u_2 + (R @ Z) / alpha
        row_q_2 = row_q_2 + R
        rhs_2 = R / alpha
    M = np.block([[row_u_1, row_q_1], [row_u_2, row_q_2]])
    G = np.vstack([rhs_1, rhs_2])
    return M, G


def build_rtr(formulation, side, mesh, k, alpha, z_out, z_in,
              kappa_reg=None, weighted=True, oversample=True,
              inversion="LU", cond_limit=1e12):
    """Dense RtR map for one subdomain.

    Weighted form maps |x'|*alpha*du/dn + Z_out_eff*u to
    |x'|*alpha*du/dn - Z_in_eff*u.  LU inversion forms the full matrix
    column-block-wise; the GMRES route exists for iteration-count
    diagnostics only (see inner_iteration_count).
    """
    M, G = formulation_system(formulation, side, mesh, k, alpha, z_out,
                              kappa_reg=kappa_reg, weighted=weighted,
                              oversample=oversample)
    fact = lu_factor(M)
    if fact.rcond < 1.0 / cond_limit:
        raise RtRConditionError(
            f"formulation {formulation} ({side}) system condition "
            f"~{1.0 / fact.rcond:.2e} exceeds {cond_limit:.1e}")
    U = lu_solve(fact, G)
    if formulation == "C":
        U = U[:mesh.N]
    R = np.eye(mesh.N, dtype=complex) - (z_out.eff(weighted) + z_in.eff(weighted)) @ U
    return RtRMap(matrix=R, robin_to_dirichlet=U, mesh=mesh, side=side,
                  formulation=formulation, k=complex(k) if not hasattr(k, "value") else k.value,
                  alpha=alpha, z_out=z_out, z_in=z_in, weighted=weighted)


def build_rtr_coated(formulation, side, mesh, t_nodes, k, alpha, z_out, z_in,
                     kappa_reg=None, weighted=True, oversample=True,
                     cond_limit=1e12):
    """RtR map of a partially coated subdomain, restricted to the Gamma_T nodes.

    z_out/z_in must vanish on the PEC portion (cutoff-sandwiched or
    restricted-scalar families); zero Robin data there then enforces the
    zero Neumann trace, so the full-curve solve needs no extra rows.
    Input data is extended by zero from Gamma_T, output restricted to it.
    """
    full = build_rtr(formulation, side, mesh, k, alpha, z_out, z_in,
                     kappa_reg=kappa_reg, weighted=weighted,
                     oversample=oversample, cond_limit=cond_limit)
    t_nodes = np.asarray(t_nodes, dtype=int)
    R = full.matrix[np.ix_(t_nodes, t_nodes)]
    U = full.robin_to_dirichlet[:, t_nodes]
    out = RtRMap(matrix=R, robin_to_dirichlet=U, mesh=mesh, side=side,
                 formulation=formulation, k=full.k, alpha=alpha,
                 z_out=z_out, z_in=z_in, weighted=weighted, restriction=t_nodes)
    out._full_robin_to_dirichlet = full.robin_to_dirichlet
    return out


def inner_iteration_count(formulation, side, mesh, k, alpha, z_out, rhs_data,
                          kappa_reg=None, weighted=True, oversample=True,
                          tol=1e-4, max_iter=4000):
    """GMRES iterations to apply one RtR system solve at the given tolerance.

    rhs_data is the Robin data ensemble: one vector or a list; returns the
    per-solve counts.
    """
    M, G = formulation_system(formulation, side, mesh, k, alpha, z_out,
                              kappa_reg=kappa_reg, weighted=weighted,
                              oversample=oversample)
    if isinstance(rhs_data, np.ndarray) and rhs_data.ndim == 1:
        rhs_data = [rhs_data]
    counts = []
    op = DenseOperator.from_matrix(M)
    for psi in rhs_data:
        b = G @ psi
        _, its, _ = gmres(op, b, tol=tol, max_iter=max_iter)
        counts.append(its)
    return counts

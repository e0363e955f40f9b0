"""Quasi-optimal transmission operators and their cutoff-localized blends.

Four families, each approximating (a multiple of) the DtN map of the medium
on the OPPOSITE side of an interface, with complexified wavenumber
kappa = k + i*sigma:

  Z      -2*alpha_opp * N_{kappa_opp}           (hypersingular)
  ZPS    -2*alpha_opp * PS(N_{kappa_opp})       (square-root Fourier multiplier)
  Za     -i*alpha_opp * kappa_opp * I           (scalar damping)
  ZPade  rotated-branch Pade approximation of ZPS using p resolvent solves

The Pade family is normalized so that its symbol converges to the ZPS
symbol -2*alpha*p^N(xi, kappa) as p grows (branch with positive imaginary
part), which fixes the sign and scaling ambiguities of the rational
square-root construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import diff_matrix, multiplier_matrix, sqrt_symbol
from .linalg import lu_factor, lu_solve
from .nystrom import assemble_bio

TWO_PI = 2.0 * np.pi

FAMILIES = ("Z", "ZPS", "Za", "ZPade")


@dataclass
class TransmissionOp:
    family: str
    mesh: object
    kappa: complex          # complexified wavenumber of the opposite medium
    alpha: float            # alpha of the opposite medium
    matrix: np.ndarray      # continuous collocation matrix
    side: int = 0
    pade_order: int = 0
    cutoff: object = None   # nodal cutoff values when localized
    parametrized: bool = False

    def __matmul__(self, density):
        return self.matrix @ density

    def eff(self, weighted=True):
        """Operator as it enters the weighted Robin data.

        BIO-backed families (hypersingular Z) are used in parametrized form
        |x'| * Z, which keeps their corner rows bounded; multiplier and
        scalar families apply plainly.
        """
        if weighted and self.parametrized:
            return self.mesh.jac[:, None] * self.matrix
        return self.matrix


@dataclass
class PadeCoefficients:
    """Rotated-branch Pade data for sqrt(1+X) ~ A0 + sum A_j X/(1+B_j X)."""

    order: int
    theta: float
    a: np.ndarray
    b: np.ndarray
    A0: complex
    A: np.ndarray
    B: np.ndarray

    @classmethod
    def build(cls, p, theta=np.pi / 3.0):
        if p < 1:
            raise ValueError(f"Pade order must be >= 1, got {p}")
        j = np.arange(1, p + 1)
        a = 2.0 / (2 * p + 1) * np.sin(j * np.pi / (2 * p + 1)) ** 2
        b = np.cos(j * np.pi / (2 * p + 1)) ** 2
        z0 = np.exp(-1j * theta) - 1.0
        A0 = np.exp(1j * theta / 2.0) * cls.rational(a, b, z0)
        den = 1.0 + b * z0
        A = np.exp(-1j * theta / 2.0) * a / den**2
        B = np.exp(-1j * theta) * b / den
        return cls(order=p, theta=theta, a=a, b=b, A0=complex(A0), A=A, B=B)

    @staticmethod
    def rational(a, b, z):
        """R_p(z) = 1 + sum a_j z / (1 + b_j z), the real-seed rational."""
        z = np.asarray(z, dtype=complex)
        return 1.0 + np.sum(a * z[..., None] / (1.0 + b * z[..., None]), axis=-1)

    def evaluate(self, x):
        """Rotated approximation of sqrt(1+x): A0 + sum A_j x/(1+B_j x)."""
        x = np.asarray(x, dtype=complex)
        return self.A0 + np.sum(self.A * x[..., None] / (1.0 + self.B * x[..., None]),
                                axis=-1)


def pade_symbol(coeff, kappa):
    """Symbol of the Pade transmission core: -(i kappa/2) * R(-(xi/kappa)^2).

    Converges to p^N(xi, kappa) = -(1/2) sqrt(xi^2 - kappa^2) on the branch
    with positive imaginary part as the order grows.
    """
    kappa = complex(kappa)

    def fn(xi):
        x = -(xi.astype(complex) / kappa) ** 2
        return 0.5j * kappa * coeff.evaluate(x)

    from .fourier import FourierSymbol
    return FourierSymbol(fn, branch=f"pade-{coeff.order}")


def build_transmission(family, mesh, kappa_opp, alpha_opp, side=0,
                       pade_order=8, pade_theta=np.pi / 3.0, oversample=True):
    """Dense transmission operator on a mesh.

    kappa_opp, alpha_opp describe the medium on the far side of the
    interface (the one the operator emulates).
    """
    kappa = complex(kappa_opp)
    if family == "Z":
        mat = -2.0 * alpha_opp * assemble_bio("N", mesh, kappa, oversample=oversample).matrix
    elif family == "ZPS":
        mat = -2.0 * alpha_opp * multiplier_matrix(sqrt_symbol(kappa), mesh)
    elif family == "Za":
        mat = (-1j * alpha_opp * kappa) * np.eye(mesh.N, dtype=complex)
    elif family == "ZPade":
        coeff = PadeCoefficients.build(pade_order, pade_theta)
        D = diff_matrix(mesh.N)
        ds = D / mesh.jac[:, None]
        X = (ds @ ds) / kappa**2
        acc = coeff.A0 * np.eye(mesh.N, dtype=complex)
        I = np.eye(mesh.N, dtype=complex)
        for Aj, Bj in zip(coeff.A, coeff.B):
            fact = lu_factor(I + Bj * X)
            acc = acc + Aj * lu_solve(fact, X)
        mat = (-1j * alpha_opp * kappa) * acc
    else:
        raise ValueError(f"unknown transmission family {family!r}")
    # BIO- and differentiation-backed families enter the weighted data in
    # parametrized (|x'|-premultiplied) form, which keeps corner rows bounded
    return TransmissionOp(family=family, mesh=mesh, kappa=kappa,
                          alpha=alpha_opp, matrix=mat, side=side,
                          pade_order=pade_order if family == "ZPade" else 0,
                          parametrized=(family in ("Z", "ZPade")))


# ---------------------------------------------------------------------------
# cutoffs and localization
# ---------------------------------------------------------------------------

def _smoothstep(x):
    """C-infinity step: 0 for x<=0, 1 for x>=1, exp(-1/x) blend between."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    out[x >= 1.0] = 1.0
    mid = (x > 0.0) & (x < 1.0)
    xm = x[mid]
    f = np.exp(-1.0 / xm)
    g = np.exp(-1.0 / (1.0 - xm))
    out[mid] = f / (f + g)
    return out


@dataclass
class CutoffFunction:
    """Smooth bump supported on one panel of a mesh.

    Values are 1 on the panel core, fall to 0 over `width` (fraction of the
    panel, measured in the pre-grading arclength coordinate), and vanish
    identically off the panel.
    """

    mesh: object
    panel: int
    width: float
    values: np.ndarray

    @classmethod
    def build(cls, mesh, panel, width=0.1):
        if not (0.0 < width < 0.5):
            raise ValueError("cutoff width must lie in (0, 1/2)")
        vals = np.zeros(mesh.N)
        idx = mesh.nodes_in_panels([panel])
        if idx.size == 0:
            raise ValueError("cutoff arc has zero measure on this mesh")
        u = mesh.local_u[idx]
        vals[idx] = _smoothstep(u / width) * _smoothstep((1.0 - u) / width)
        return cls(mesh=mesh, panel=panel, width=width, values=vals)


def sandwich(chi_target, operator_matrix, chi_source=None):
    """diag(chi) @ Op @ diag(chi): the arc-localized operator blend."""
    cs = chi_target if chi_source is None else chi_source
    return chi_target.values[:, None] * operator_matrix * cs.values[None, :]


def coercivity_check(op, mesh, trials=100, seed=0, max_mode=None):
    """Sample Im <Z phi, phi>_{L2(Gamma)} over random smooth densities.

    Returns (values, n_positive, n_negative); a well-posed transmission
    operator gives one strict sign for all trials.
    """
    rng = np.random.default_rng(seed)
    if max_mode is None:
        max_mode = min(mesh.N // 4, 24)
    w = mesh.weights
    vals = np.empty(trials)
    for i in range(trials):
        modes = np.arange(-max_mode, max_mode + 1)
        c = rng.standard_normal(len(modes)) + 1j * rng.standard_normal(len(modes))
        c /= (1.0 + np.abs(modes)) ** 2
        phi = np.exp(1j * np.outer(mesh.t, modes)) @ c
        zphi = op.matrix @ phi
        vals[i] = np.imag(np.sum(zphi * np.conj(phi) * w))
    return vals, int(np.sum(vals > 0)), int(np.sum(vals < 0))

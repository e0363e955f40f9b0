"""Nystrom assembly of the Helmholtz/Laplace boundary integral operators.

Kernels split as A(t,s) = A1(t,s)*ln(4 sin^2((t-s)/2)) + A2(t,s); the log
part integrates with the spectral Kusmaul-Martensen weights, the smooth part
with the trapezoidal rule.  Operators act on plain nodal density values; the
Jacobian |x'(s)| is folded into the matrices.

Two quadrature modes:
  * square collocation (classical KM on the mesh nodes);
  * oversampled: quadrature on the interleaved 2N grid composed with exact
    trigonometric upsampling, which removes the near-Nyquist aliasing of the
    log rule (used when operator identities are tested in operator norm).

Conventions fixed module-wide:
  * curves are counterclockwise, the normal (x2', -x1')/|x'| points out of
    the enclosed region;
  * all four operators S, K, K^T, N are defined with respect to that normal
    (exterior-domain formulations flip the sign of K and K^T at the call
    site, never here);
  * the hypersingular operator is assembled in the integration-by-parts
    (Maue) form d/ds S d/ds + k^2 n.S(n .), compatible with graded meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import hankel1, jv

from .fourier import GridTransfer, diff_matrix
from .geometry import build_graded_mesh

TWO_PI = 2.0 * np.pi
EULER_GAMMA = float(np.euler_gamma)

KINDS = ("S", "K", "KT", "N")


class WavenumberError(ValueError):
    pass


class PointTooCloseError(ValueError):
    def __init__(self, index, dist, h):
        super().__init__(
            f"evaluation point {index} at distance {dist:.3e} from the boundary "
            f"(local mesh width {h:.3e})")
        self.index = index


@dataclass(frozen=True)
class Wavenumber:
    """Complex wavenumber k + i*sigma with Re >= 0, Im >= 0."""

    value: complex
    medium: int = -1
    rule: str = "explicit"

    def __post_init__(self):
        v = complex(self.value)
        if v.real < 0 or v.imag < 0:
            raise WavenumberError(f"wavenumber {v} must have Re >= 0 and Im >= 0")

    @classmethod
    def damped(cls, k, medium=-1):
        """k + i k^(1/3), the optimized complexification rule."""
        return cls(complex(k) + 1j * float(k) ** (1.0 / 3.0), medium=medium, rule="k^(1/3)")


def _kappa(k):
    if isinstance(k, Wavenumber):
        k = k.value
    k = complex(k)
    if k.imag < 0:
        raise WavenumberError(f"Im(k) = {k.imag} < 0 breaks the radiating kernel split")
    return k


@dataclass
class BoundaryOp:
    kind: str
    k: object         # complex wavenumber; 0 marks Laplace
    mesh: object
    matrix: np.ndarray

    def __matmul__(self, density):
        return self.matrix @ density


# ---------------------------------------------------------------------------
# quadrature contexts (square and oversampled), cached per mesh
# ---------------------------------------------------------------------------

def _log_weights_square(N):
    """KM weights R(t_i - t_j) on one shifted grid, as a circulant."""
    spec = np.zeros(N)
    m = np.arange(1, N // 2)
    spec[m] = 1.0 / m
    row = -(4.0 * np.pi / N) * np.real(np.fft.fft(spec))
    row -= (4.0 * np.pi / N**2) * np.cos(np.pi * np.arange(N))
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return row[idx]


def _log_weights_offset(N, M, ishift=0):
    """KM weights of the M-point rule collocated at the interleaved N grid.

    Parameter differences live on the half-offset lattice
    (2i - j + ishift + 1/2)*2*pi/M, so no collocation point meets a
    quadrature point.
    """
    a = np.zeros(M, dtype=complex)
    mm = np.arange(1, M // 2)
    a[mm] = np.exp(1j * np.pi * mm / M) / mm
    cossum = np.real(np.fft.ifft(a) * M)
    ell = np.arange(M)
    nyq = np.exp(-1j * (M // 2) * (ell + 0.5) * TWO_PI / M)
    row = -(4.0 * np.pi / M) * cossum - (4.0 * np.pi / M**2) * nyq
    i = np.arange(N)[:, None]
    j = np.arange(M)[None, :]
    return row[(2 * i - j + ishift) % M]


class _QuadContext:
    """Geometry and kernel cache for one (mesh, oversample) pair."""

    def __init__(self, mesh, oversample):
        self.mesh = mesh
        self.oversample = oversample
        N = mesh.N
        if oversample:
            M = 2 * N
            # fine grid posed so that t_i - tau_j = (2i - j + ishift + 1/2)*pi/N
            c0 = mesh.shift * N
            c1 = (2.0 * c0 - 0.5) % 1.0
            ishift = int(round(2.0 * c0 - 0.5 - c1))
            fine = build_graded_mesh(mesh.curve, M, mesh.degree,
                                     c1 / M, counts=2 * mesh.counts)
            self.src = fine
            self.R = _log_weights_offset(N, M, ishift)
            self.E = GridTransfer(N, M, mesh.shift, fine.shift).matrix()
            d = mesh.t[:, None] - fine.t[None, :]
        else:
            self.src = mesh
            self.R = _log_weights_square(N)
            self.E = None
            d = mesh.t[:, None] - mesh.t[None, :]
        tgt = mesh
        dx = tgt.points[:, 0][:, None] - self.src.points[None, :, 0]
        dy = tgt.points[:, 1][:, None] - self.src.points[None, :, 1]
        r = np.sqrt(dx * dx + dy * dy)
        self.square = not oversample
        if self.square:
            np.fill_diagonal(r, 1.0)
        self.dx, self.dy, self.r = dx, dy, r
        ls = 4.0 * np.sin(d / 2.0) ** 2
        if self.square:
            np.fill_diagonal(ls, 1.0)
        self.logsin = np.log(ls)
        self.scale = TWO_PI / self.src.N
        self._bessel = {}

    def bessel(self, kappa):
        key = complex(kappa)
        if key not in self._bessel:
            if len(self._bessel) >= 3:
                self._bessel.pop(next(iter(self._bessel)))
            z = key * self.r
            self._bessel[key] = {
                "h0": hankel1(0, z), "j0": jv(0, z),
                "h1": hankel1(1, z), "j1": jv(1, z),
            }
        return self._bessel[key]

    def assemble(self, A1, A2, diag_A1, diag_A2):
        """R*A1 + trapezoid*A2, with analytic diagonals in square mode."""
        if self.square:
            M1 = A1.copy()
            np.fill_diagonal(M1, diag_A1)
            np.fill_diagonal(A2, diag_A2)
            return self.R * M1 + self.scale * A2
        out = self.R * A1 + self.scale * A2
        return out @ self.E

    def mvec_src(self):
        s = self.src
        return np.stack([s.d1[:, 1], -s.d1[:, 0]], axis=1)


def _ctx(mesh, oversample):
    key = "_quad_ctx_ov" if oversample else "_quad_ctx"
    c = getattr(mesh, key, None)
    if c is None:
        c = _QuadContext(mesh, oversample)
        setattr(mesh, key, c)
    return c


def clear_cache(mesh):
    for key in ("_quad_ctx", "_quad_ctx_ov"):
        if hasattr(mesh, key):
            delattr(mesh, key)


# ---------------------------------------------------------------------------
# individual kernels
# ---------------------------------------------------------------------------

def _single_layer(ctx, kappa, weighted=True):
    b = ctx.bessel(kappa)
    w = ctx.src.jac
    A = 0.25j * b["h0"]
    A1 = -(1.0 / (4.0 * np.pi)) * b["j0"]
    A2 = A - A1 * ctx.logsin
    diag_A2 = 0.25j - EULER_GAMMA / TWO_PI - np.log(kappa * w / 2.0) / TWO_PI
    if weighted:
        return ctx.assemble(A1 * w[None, :], A2 * w[None, :],
                            -w / (4.0 * np.pi), diag_A2 * w)
    return ctx.assemble(A1, A2, -1.0 / (4.0 * np.pi), diag_A2)


def _single_layer_laplace(ctx, weighted=True):
    w = ctx.src.jac
    A1 = np.full_like(ctx.r, -1.0 / (4.0 * np.pi))
    A2 = -(np.log(ctx.r**2) - ctx.logsin) / (4.0 * np.pi)
    diag_A2 = -np.log(w) / TWO_PI
    if weighted:
        return ctx.assemble(A1 * w[None, :], A2 * w[None, :],
                            -w / (4.0 * np.pi), diag_A2 * w)
    return ctx.assemble(A1, A2, -1.0 / (4.0 * np.pi), diag_A2)


def _dl_geometry(ctx, transpose):
    """Kernel factor [(x(t)-x(s)).m]/r with the Jacobian ratio folded in.

    m = nu*|x'| already carries the source Jacobian for K; the transpose
    kernel uses m(t) and the explicit ratio |x'(s)|/|x'(t)|.
    """
    m_src = ctx.mvec_src()
    if not transpose:
        dot = ctx.dx * m_src[None, :, 0] + ctx.dy * m_src[None, :, 1]
        return dot / ctx.r
    tgt = ctx.mesh
    m_tgt = np.stack([tgt.d1[:, 1], -tgt.d1[:, 0]], axis=1)
    dot = -(ctx.dx * m_tgt[:, None, 0] + ctx.dy * m_tgt[:, None, 1])
    ratio = ctx.src.jac[None, :] / tgt.jac[:, None]
    return dot / ctx.r * ratio


def _curvature_diag(mesh):
    """Common diagonal limit (x''.m)/(4 pi |x'|^2) of the K and K^T kernels."""
    m = np.stack([mesh.d1[:, 1], -mesh.d1[:, 0]], axis=1)
    return np.einsum("ij,ij->i", mesh.d2, m) / (4.0 * np.pi * mesh.jac**2)


def _double_layer_laplace(ctx, transpose=False, mass_correct=None):
    """Laplace double layer; for K the row mass is pinned to the exact -1/2.

    Near a corner the kernel concentrates O(1) mass on the opposite arm,
    which no fixed quadrature resolves; subtracting the quadrature's row sum
    and adding the exact Gauss mass restores consistency at every collocation
    point (the correction is ~1e-15 away from corners).
    """
    if mass_correct is None:
        mass_correct = not transpose
    A = _dl_geometry(ctx, transpose) / (TWO_PI * ctx.r)
    if ctx.square:
        np.fill_diagonal(A, _curvature_diag(ctx.mesh))
        out = ctx.scale * A
    else:
        out = (ctx.scale * A) @ ctx.E
    if mass_correct:
        out = out + np.diag(-0.5 - out.sum(axis=1))
    return out


def _double_layer_helmholtz_minus_laplace(ctx, kappa, transpose=False):
    """Difference kernel K_kappa - K_L: weakly singular, corner-safe."""
    b = ctx.bessel(kappa)
    geo = _dl_geometry(ctx, transpose)
    A = (0.25j * kappa * b["h1"] - 1.0 / (TWO_PI * ctx.r)) * geo
    A1 = -(kappa / (4.0 * np.pi)) * b["j1"] * geo
    A2 = A - A1 * ctx.logsin
    return ctx.assemble(A1, A2, 0.0, 0.0)


def _double_layer(ctx, kappa, transpose=False):
    if not transpose:
        # corner-consistent split through the exact Laplace mass
        return (_double_layer_helmholtz_minus_laplace(ctx, kappa, False)
                + _double_layer_laplace(ctx, False, mass_correct=True))
    b = ctx.bessel(kappa)
    geo = _dl_geometry(ctx, transpose)
    A = 0.25j * kappa * b["h1"] * geo
    A1 = -(kappa / (4.0 * np.pi)) * b["j1"] * geo
    A2 = A - A1 * ctx.logsin
    return ctx.assemble(A1, A2, 0.0, _curvature_diag(ctx.mesh))


def _normal_product(ctx, pairs):
    """KM matrix of sum_i c_i (i/4) H0(kappa_i r) (n(t).n(s)) |x'(s)|."""
    w = ctx.src.jac
    nn = ctx.mesh.normals @ ctx.src.normals.T
    A = np.zeros_like(ctx.r, dtype=complex)
    A1 = np.zeros_like(ctx.r, dtype=complex)
    diag_A2 = np.zeros(ctx.mesh.N, dtype=complex)
    for coeff, kappa in pairs:
        b = ctx.bessel(kappa)
        A = A + coeff * 0.25j * b["h0"]
        A1 = A1 - (coeff / (4.0 * np.pi)) * b["j0"]
        diag_A2 = diag_A2 + coeff * (
            0.25j - EULER_GAMMA / TWO_PI - np.log(kappa * ctx.mesh.jac / 2.0) / TWO_PI)
    A = A * nn
    A1 = A1 * nn
    A2 = A - A1 * ctx.logsin
    diag_A1 = -sum(co for co, _ in pairs) * ctx.mesh.jac / (4.0 * np.pi)
    return ctx.assemble(A1 * w[None, :], A2 * w[None, :],
                        diag_A1, diag_A2 * ctx.mesh.jac)


def _hypersingular(ctx, kappa):
    """Maue form: (1/|x'|) d/dt Shat d/dt + kappa^2 n.S(n .)."""
    D = diff_matrix(ctx.mesh.N)
    Shat = _single_layer(ctx, kappa, weighted=False)
    Q = _normal_product(ctx, [(kappa**2, kappa)])
    return (D @ (Shat @ D)) / ctx.mesh.jac[:, None] + Q


def _hypersingular_laplace(ctx):
    D = diff_matrix(ctx.mesh.N)
    Shat = _single_layer_laplace(ctx, weighted=False)
    return (D @ (Shat @ D)) / ctx.mesh.jac[:, None]


# ---------------------------------------------------------------------------
# public assembly
# ---------------------------------------------------------------------------

def assemble_bio(kind, mesh, k, oversample=False):
    """Dense collocation matrix of one boundary integral operator.

    kind in {'S','K','KT','N'}; k = 0 selects the Laplace kernel.  Densities
    are nodal values; the returned operator maps them to nodal values of the
    integral (spectrally accurate on smooth curves, high order on graded
    corner meshes).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    kap = 0.0 if (not isinstance(k, Wavenumber) and complex(k) == 0) else _kappa(k)
    ctx = _ctx(mesh, oversample)
    if kap == 0.0:
        mat = {
            "S": _single_layer_laplace,
            "K": lambda c: _double_layer_laplace(c, transpose=False),
            "KT": lambda c: _double_layer_laplace(c, transpose=True),
            "N": _hypersingular_laplace,
        }[kind](ctx)
    else:
        mat = {
            "S": lambda c: _single_layer(c, kap),
            "K": lambda c: _double_layer(c, kap, transpose=False),
            "KT": lambda c: _double_layer(c, kap, transpose=True),
            "N": lambda c: _hypersingular(c, kap),
        }[kind](ctx)
    return BoundaryOp(kind=kind, k=kap, mesh=mesh, matrix=np.asarray(mat, dtype=complex))


def assemble_bio_difference(kind, mesh, k1, k2, oversample=False):
    """Difference operator Op_{k1} - Op_{k2} from the smoothed difference kernel.

    The log-singular coefficients are differenced analytically inside one
    quadrature pass, never as a subtraction of two singular assemblies.
    """
    ka, kb = _kappa(k1), _kappa(k2)
    if ka == kb:
        raise WavenumberError("difference operator needs distinct wavenumbers")
    if ka == 0 or kb == 0:
        raise WavenumberError("difference assembly covers Helmholtz pairs only")
    ctx = _ctx(mesh, oversample)
    w = ctx.src.jac
    if kind == "S":
        ba, bb = ctx.bessel(ka), ctx.bessel(kb)
        A = 0.25j * (ba["h0"] - bb["h0"])
        A1 = -(ba["j0"] - bb["j0"]) / (4.0 * np.pi)
        A2 = A - A1 * ctx.logsin
        diag = -np.log(ka / kb) / TWO_PI * ctx.mesh.jac
        mat = ctx.assemble(A1 * w[None, :], A2 * w[None, :], 0.0, diag)
    elif kind in ("K", "KT"):
        ba, bb = ctx.bessel(ka), ctx.bessel(kb)
        geo = _dl_geometry(ctx, kind == "KT")
        A = 0.25j * (ka * ba["h1"] - kb * bb["h1"]) * geo
        A1 = -((ka * ba["j1"] - kb * bb["j1"]) / (4.0 * np.pi)) * geo
        A2 = A - A1 * ctx.logsin
        mat = ctx.assemble(A1, A2, 0.0, 0.0)
    elif kind == "N":
        D = diff_matrix(ctx.mesh.N)
        ba, bb = ctx.bessel(ka), ctx.bessel(kb)
        A = 0.25j * (ba["h0"] - bb["h0"])
        A1 = -(ba["j0"] - bb["j0"]) / (4.0 * np.pi)
        A2 = A - A1 * ctx.logsin
        Sd = ctx.assemble(A1, A2, 0.0, -np.log(ka / kb) / TWO_PI)
        Q = _normal_product(ctx, [(ka**2, ka), (-(kb**2), kb)])
        mat = (D @ (Sd @ D)) / ctx.mesh.jac[:, None] + Q
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    return BoundaryOp(kind=f"{kind}-diff", k=(ka, kb), mesh=mesh, matrix=mat)


# ---------------------------------------------------------------------------
# layer potentials off the boundary
# ---------------------------------------------------------------------------

@dataclass
class PotentialField:
    points: np.ndarray
    values: np.ndarray
    kind: str
    k: complex


def eval_potential(kind, mesh, k, density, points, check_distance=True):
    """Trapezoidal evaluation of SL/DL potentials at off-boundary points.

    Quadrature accuracy degrades inside ~3 local mesh widths of the curve;
    points closer than one local width are rejected outright (the error
    message names the offending point).
    """
    if kind not in ("SL", "DL"):
        raise ValueError("kind must be 'SL' or 'DL'")
    kap = 0.0 if (not isinstance(k, Wavenumber) and complex(k) == 0) else _kappa(k)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    density = np.asarray(density, dtype=complex)
    dx = points[:, 0][:, None] - mesh.points[None, :, 0]
    dy = points[:, 1][:, None] - mesh.points[None, :, 1]
    r = np.sqrt(dx * dx + dy * dy)
    if check_distance:
        h = mesh.jac * (TWO_PI / mesh.N)
        jmin = np.argmin(r, axis=1)
        rmin = r[np.arange(len(points)), jmin]
        bad = rmin < h[jmin]
        if np.any(bad):
            i = int(np.argmax(bad))
            raise PointTooCloseError(i, float(rmin[i]), float(h[jmin[i]]))
    scale = TWO_PI / mesh.N
    if kind == "SL":
        ker = 0.25j * hankel1(0, kap * r) if kap != 0 else -np.log(r) / TWO_PI
        vals = scale * (ker * mesh.jac[None, :]) @ density
    else:
        m = np.stack([mesh.d1[:, 1], -mesh.d1[:, 0]], axis=1)
        dot = dx * m[None, :, 0] + dy * m[None, :, 1]
        if kap != 0:
            ker = 0.25j * kap * hankel1(1, kap * r) * dot / r
        else:
            ker = dot / (TWO_PI * r**2)
        vals = scale * ker @ density
    return PotentialField(points=points, values=vals, kind=kind, k=kap)

"""Problem configuration, incident fields, far/near-field evaluation, and the
Mie-series reference solution.

The Mie oracle is implemented against Bessel routines only and never calls
the Nystrom assembly paths, so it can stand as an independent reference.

Far-field convention: the scattered field behaves like
u_0(x) ~ u_inf(x_hat) e^{i k0 |x|} / sqrt(|x|), and

  u_inf(x_hat) = c(k0) * Int_Gamma [u0 d/dn(y) - du0/dn] e^{-i k0 x_hat.y} ds(y)

with c(k0) = e^{i pi/4} / sqrt(8 pi k0) and n the normal pointing into the
unbounded region (the mesh normal of the counterclockwise curve).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import h1vp, hankel1, jv, jvp

from . import geometry as geom
from .nystrom import Wavenumber

TWO_PI = 2.0 * np.pi


class ConfigError(ValueError):
    pass


@dataclass
class ScatterConfig:
    """Full transmission-problem description."""

    geometry: str = "circle"          # circle | square | l-shape | polygon file
    size: float = 1.0                 # radius or side
    omega: float = 1.0
    eps0: float = 1.0
    eps1: float = 4.0
    alpha_rule: str = "unit"          # unit -> alpha_j = 1; inv-eps -> 1/eps_j
    incidence: float = 0.0            # direction angle of d
    N0: int = 128
    N1: int = 0                       # 0 -> conforming (N1 = N0)
    family: str = "Z"
    interior_formulation: str = "B"
    exterior_formulation: str = "A"
    tol: float = 1e-4
    max_iter: int = 2000
    grading_degree: int = 3
    sigma_rule: str = "k^(1/3)"
    pade_order: int = 8
    pade_theta: float = np.pi / 3.0
    cutoff_width: float = 0.1
    oversample: bool = True
    coated: bool = False              # PEC on the lower semicircle (circle only)
    pec_fraction: float = 0.5
    scheme: str = "none"              # subdomain subdivision
    far_directions: int = 1024
    polygon_path: str = ""

    def __post_init__(self):
        if self.omega <= 0:
            raise ConfigError("omega must be positive (k0 > 0 enforced)")
        if self.eps0 <= 0 or self.eps1 <= 0:
            raise ConfigError("permittivities must be positive")
        if self.N1 == 0:
            self.N1 = self.N0

    @property
    def k(self):
        return (self.omega * np.sqrt(self.eps0), self.omega * np.sqrt(self.eps1))

    @property
    def alpha(self):
        if self.alpha_rule == "unit":
            return (1.0, 1.0)
        if self.alpha_rule == "inv-eps":
            return (1.0 / self.eps0, 1.0 / self.eps1)
        raise ConfigError(f"unknown alpha rule {self.alpha_rule!r}")

    def kappa(self, j):
        """Complexified wavenumber of medium j under the sigma rule."""
        kj = self.k[j]
        if self.sigma_rule == "k^(1/3)":
            return Wavenumber.damped(kj, medium=j).value
        if self.sigma_rule.startswith("sigma="):
            return kj + 1j * float(self.sigma_rule.split("=", 1)[1])
        raise ConfigError(f"unknown sigma rule {self.sigma_rule!r}")

    @property
    def direction(self):
        return np.array([np.cos(self.incidence), np.sin(self.incidence)])

    def curve(self):
        if self.geometry == "circle" and not self.coated:
            return geom.circle(self.size)
        if self.geometry == "circle" and self.coated:
            # PEC arc centered on the bottom of the circle
            span = TWO_PI * self.pec_fraction
            mid = 1.5 * np.pi
            return geom.coated_circle(self.size, mid - span / 2.0, mid + span / 2.0)
        if self.geometry == "square":
            return geom.square(self.size)
        if self.geometry in ("l-shape", "lshape"):
            return geom.l_shape(self.size)
        if self.geometry == "polygon":
            return geom.load_polygon(self.polygon_path)
        raise ConfigError(f"unknown geometry {self.geometry!r}")

    def with_(self, **kw):
        return replace(self, **kw)


# ---------------------------------------------------------------------------
# incident plane wave
# ---------------------------------------------------------------------------

def incident_trace(mesh, k0, direction):
    """(u_inc, grad u_inc . n) at the mesh nodes, n the mesh normal."""
    d = np.asarray(direction, dtype=float)
    phase = np.exp(1j * k0 * (mesh.points @ d))
    dn = 1j * k0 * (mesh.normals @ d) * phase
    return phase, dn


def incident_field(points, k0, direction):
    d = np.asarray(direction, dtype=float)
    return np.exp(1j * k0 * (np.atleast_2d(points) @ d))


# ---------------------------------------------------------------------------
# far field
# ---------------------------------------------------------------------------

@dataclass
class FarField:
    angles: np.ndarray
    values: np.ndarray
    k0: float

    @property
    def directions(self):
        return np.stack([np.cos(self.angles), np.sin(self.angles)], axis=1)


def far_field(mesh, u, q, k0, n_dir=1024):
    """Radiation-zone pattern from exterior Cauchy data on Gamma.

    u are nodal Dirichlet values of the scattered field; q the *weighted*
    Neumann data |x'| du/dn with n pointing into the unbounded region.
    """
    angles = TWO_PI * np.arange(n_dir) / n_dir
    xh = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    c = np.exp(1j * np.pi / 4.0) / np.sqrt(8.0 * np.pi * k0)
    m = np.stack([mesh.d1[:, 1], -mesh.d1[:, 0]], axis=1)
    phase = np.exp(-1j * k0 * (xh @ mesh.points.T))       # (n_dir, N)
    dn_phase = (-1j * k0) * (xh @ m.T) * phase
    vals = c * (TWO_PI / mesh.N) * (dn_phase @ u - phase @ q)
    return FarField(angles=angles, values=vals, k0=float(k0))


def farfield_error(candidate, reference, mode="relative"):
    """Sup-norm far-field deviation; relative normalizes by the reference."""
    if len(candidate.values) != len(reference.values):
        raise ValueError("direction sets differ")
    err = np.abs(candidate.values - reference.values).max()
    if mode == "absolute":
        return float(err)
    return float(err / np.abs(reference.values).max())


# ---------------------------------------------------------------------------
# Mie-series oracle
# ---------------------------------------------------------------------------

@dataclass
class MieSolution:
    radius: float
    k0: float
    k1: float
    alpha0: float
    alpha1: float
    incidence: float
    modes: np.ndarray
    b: np.ndarray               # exterior scattered H-coefficients
    c: np.ndarray               # interior J-coefficients
    tail: float

    def exterior_scattered(self, points):
        r, th = _polar(points)
        out = np.zeros(len(r), dtype=complex)
        for m, bm in zip(self.modes, self.b):
            out += bm * hankel1(m, self.k0 * r) * np.exp(1j * m * th)
        return out

    def interior_field(self, points):
        r, th = _polar(points)
        out = np.zeros(len(r), dtype=complex)
        for m, cm in zip(self.modes, self.c):
            out += cm * jv(m, self.k1 * r) * np.exp(1j * m * th)
        return out

    def boundary_data(self, theta):
        """Exterior scattered Cauchy data (u, du/dr) at angles theta on r=a."""
        theta = np.asarray(theta)
        u = np.zeros(len(theta), dtype=complex)
        dr = np.zeros(len(theta), dtype=complex)
        for m, bm in zip(self.modes, self.b):
            e = np.exp(1j * m * theta)
            u += bm * hankel1(m, self.k0 * self.radius) * e
            dr += bm * self.k0 * h1vp(m, self.k0 * self.radius) * e
        return u, dr

    def far_field(self, n_dir=1024):
        angles = TWO_PI * np.arange(n_dir) / n_dir
        amp = np.sqrt(2.0 / (np.pi * self.k0)) * np.exp(-1j * np.pi / 4.0)
        vals = np.zeros(n_dir, dtype=complex)
        for m, bm in zip(self.modes, self.b):
            vals += bm * (-1j) ** m * np.exp(1j * m * angles)
        return FarField(angles=angles, values=amp * vals, k0=self.k0)


def _polar(points):
    p = np.atleast_2d(points)
    return np.hypot(p[:, 0], p[:, 1]), np.arctan2(p[:, 1], p[:, 0])


def mie_transmission(radius, omega, eps=(1.0, 4.0), alpha=(1.0, 1.0),
                     incidence=0.0, mode_cap=None):
    """Separation-of-variables solution of the circle transmission problem.

    Matches u0 + u_inc = u1 and alpha0 d/dr(u0 + u_inc) = alpha1 d/dr u1 on
    r = radius, per angular mode.  Returns coefficients and a converged-tail
    estimate.
    """
    k0 = omega * np.sqrt(eps[0])
    k1 = omega * np.sqrt(eps[1])
    a0, a1 = alpha
    if mode_cap is None:
        mode_cap = int(np.ceil(k1 * radius + 20))
    modes = np.arange(-mode_cap, mode_cap + 1)
    b = np.zeros(len(modes), dtype=complex)
    c = np.zeros(len(modes), dtype=complex)
    for i, m in enumerate(modes):
        am = (1j**m) * np.exp(-1j * m * incidence)
        H, Hp = hankel1(m, k0 * radius), h1vp(m, k0 * radius)
        J1, J1p = jv(m, k1 * radius), jvp(m, k1 * radius)
        J0, J0p = jv(m, k0 * radius), jvp(m, k0 * radius)
        A = np.array([[H, -J1], [a0 * k0 * Hp, -a1 * k1 * J1p]], dtype=complex)
        rhs = np.array([-am * J0, -a0 * k0 * am * J0p], dtype=complex)
        sol = np.linalg.solve(A, rhs)
        b[i], c[i] = sol
    tail = float(np.abs(b[0]) + np.abs(b[-1]))
    return MieSolution(radius=radius, k0=k0, k1=k1, alpha0=a0, alpha1=a1,
                       incidence=incidence, modes=modes, b=b, c=c, tail=tail)


@dataclass
class CoatedMieSolution:
    radius: float
    k0: float
    k1: float
    modes: np.ndarray
    b: np.ndarray
    c: np.ndarray
    residual: float
    cond: float

    def far_field(self, n_dir=1024):
        angles = TWO_PI * np.arange(n_dir) / n_dir
        amp = np.sqrt(2.0 / (np.pi * self.k0)) * np.exp(-1j * np.pi / 4.0)
        vals = np.zeros(n_dir, dtype=complex)
        for m, bm in zip(self.modes, self.b):
            vals += bm * (-1j) ** m * np.exp(1j * m * angles)
        return FarField(angles=angles, values=amp * vals, k0=self.k0)


def mie_coated(radius, omega, eps=(1.0, 16.0), alpha=(1.0, 1.0), incidence=0.0,
               mode_cap=None, pec=(np.pi, TWO_PI), n_colloc_factor=6):
    """Modal least-squares collocation for the partially coated circle.

    Convergence-sanity oracle only (the dense modal system turns
    ill-conditioned well before high accuracy); reports the collocation
    residual and the system condition number.
    """
    k0 = omega * np.sqrt(eps[0])
    k1 = omega * np.sqrt(eps[1])
    a0, a1 = alpha
    if mode_cap is None:
        mode_cap = int(np.ceil(k1 * radius + 12))
    modes = np.arange(-mode_cap, mode_cap + 1)
    M = len(modes)
    n_pts = n_colloc_factor * M
    th = TWO_PI * (np.arange(n_pts) + 0.5) / n_pts
    on_pec = (th >= pec[0]) & (th < pec[1])
    am = (1j**modes) * np.exp(-1j * modes * incidence)
    E = np.exp(1j * np.outer(th, modes))
    uinc = E @ (am * jv(modes, k0 * radius))
    duinc = E @ (am * k0 * jvp(modes, k0 * radius))
    # unknowns scaled so each basis column is O(1) on the circle (the raw
    # Hankel/Bessel magnitudes swamp the least-squares system otherwise)
    sH = hankel1(modes, k0 * radius)
    sJ = jv(modes, k1 * radius)
    sJ = np.where(np.abs(sJ) > 1e-280, sJ, 1.0)
    colH = E
    colHp = E * (k0 * h1vp(modes, k0 * radius) / sH)[None, :]
    colJ = E
    colJp = E * (k1 * jvp(modes, k1 * radius) / sJ)[None, :]
    rows, rhs = [], []
    t = ~on_pec
    rows.append(np.hstack([colH[t], -colJ[t]]));        rhs.append(-uinc[t])
    rows.append(np.hstack([a0 * colHp[t], -a1 * colJp[t]])); rhs.append(-a0 * duinc[t])
    rows.append(np.hstack([colHp[on_pec], np.zeros_like(colJp[on_pec])]))
    rhs.append(-duinc[on_pec])
    rows.append(np.hstack([np.zeros_like(colHp[on_pec]), colJp[on_pec]]))
    rhs.append(np.zeros(int(on_pec.sum()), dtype=complex))
    A = np.vstack(rows)
    y = np.concatenate(rhs)
    sol, res, rank, sv = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(A @ sol - y) / max(np.linalg.norm(y), 1e-300))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    return CoatedMieSolution(radius=radius, k0=k0, k1=k1, modes=modes,
                             b=sol[:M] / sH, c=sol[M:] / sJ,
                             residual=resid, cond=cond)


# ---------------------------------------------------------------------------
# near fields
# ---------------------------------------------------------------------------

def _inside_curve(curve, points, samples=2048):
    """Winding-number membership test against a dense polyline of the curve."""
    mesh = geom.build_graded_mesh(curve, samples, 2)
    poly = mesh.points
    x, y = points[:, 0], points[:, 1]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    inside = np.zeros(len(points), dtype=bool)
    for (ax, ay, bx, by) in zip(x0, y0, x1, y1):
        cond = (ay > y) != (by > y)
        xin = (bx - ax) * (y - ay) / (by - ay + 1e-300) + ax
        inside ^= cond & (x < xin)
    return inside


@dataclass
class NearFieldGrid:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray          # (ny, nx) complex, NaN on the masked shell
    window: tuple
    resolution: tuple


def near_field_grid(solution, window, resolution):
    """Total-field samples on a rectangular grid.

    `solution` provides mesh, k0, incident data and Cauchy/density data via
    exterior_total(points) / interior_total(points); points inside the
    unreliable shell near Gamma are masked with NaN, never extrapolated.
    """
    x0, x1, y0, y1 = window
    nx, ny = resolution
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    mesh = solution.mesh
    inside = _inside_curve(mesh.curve, pts)
    d2 = ((pts[:, None, :] - mesh.points[None, :, :]) ** 2).sum(axis=2)
    jmin = np.argmin(d2, axis=1)
    h = mesh.jac * (TWO_PI / mesh.N)
    shell = np.sqrt(d2[np.arange(len(pts)), jmin]) < 3.0 * h[jmin]
    vals = np.full(len(pts), np.nan + 0j)
    ext = ~inside & ~shell
    itr = inside & ~shell
    if np.any(ext):
        vals[ext] = solution.exterior_total(pts[ext])
    if np.any(itr):
        vals[itr] = solution.interior_total(pts[itr])
    return NearFieldGrid(x=xs, y=ys, values=vals.reshape(ny, nx),
                         window=window, resolution=resolution)


def scattered_power(ff):
    """Integral of |u_inf|^2 over directions (trapezoid on the circle)."""
    return float(np.sum(np.abs(ff.values) ** 2) * TWO_PI / len(ff.values))


def optical_theorem_residual(ff, incidence):
    """k0 Int |u_inf|^2 + sqrt(8 pi k0) Re[e^{i pi/4} u_inf(d)] (zero if lossless)."""
    idx = int(round(incidence / (TWO_PI / len(ff.values)))) % len(ff.values)
    fwd = ff.values[idx]
    return float(ff.k0 * scattered_power(ff)
                 + np.sqrt(8.0 * np.pi * ff.k0) * np.real(np.exp(1j * np.pi / 4.0) * fwd))

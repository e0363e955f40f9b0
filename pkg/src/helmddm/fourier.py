"""Trigonometric interpolation tools: spectral derivatives, Fourier-multiplier
operators with square-root principal symbols, and inter-grid transfer.

All routines act on nodal values sampled at the shifted uniform parameter
grid t_m = 2*pi*(m/N + shift).  The Nyquist mode (-N/2) is kept as a single
coefficient (no symmetric split); its derivative multiplier is zeroed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi


def _modes(N):
    """Signed integer modes in FFT layout: 0..N/2-1, -N/2..-1."""
    m = np.fft.fftfreq(N, d=1.0 / N)
    return np.rint(m).astype(int)


def coefficients(values, shift=0.0):
    """Interpolant coefficients c_m (FFT layout) of samples at 2*pi*(j/N+shift)."""
    values = np.asarray(values)
    N = len(values)
    c = np.fft.fft(values) / N
    return c * np.exp(-1j * _modes(N) * TWO_PI * shift)

def synthesize(coeffs, shift=0.0):
    """Inverse of :func:`coefficients` for the same grid layout."""
    N = len(coeffs)
    c = coeffs * np.exp(1j * _modes(N) * TWO_PI * shift)
    return np.fft.ifft(c) * N


def diff_values(values):
    """d/dt of the trigonometric interpolant at the nodes (shift cancels).

    The Nyquist coefficient is treated as the signed mode -N/2 so that
    compositions like d/dt S d/dt reproduce the full symbol m^2 at every
    discrete mode (the price is a complex matrix).
    """
    N = len(values)
    m = _modes(N).astype(float)
    return np.fft.ifft(1j * m * np.fft.fft(values))


@lru_cache(maxsize=32)
def diff_matrix(N):
    """Dense spectral differentiation matrix on a uniform N-grid."""
    D = np.empty((N, N), dtype=complex)
    eye = np.eye(N)
    for j in range(N):
        D[:, j] = diff_values(eye[:, j])
    return D


def tangential_derivative(mesh, density):
    """d/ds along the curve: parameter derivative divided by the Jacobian."""
    return diff_values(np.asarray(density, dtype=complex)) / mesh.jac


@dataclass(frozen=True)
class FourierSymbol:
    """Complex symbol xi -> p(xi) with a named branch rule."""

    fn: object
    branch: str = "principal"

    def __call__(self, xi):
        return self.fn(np.asarray(xi, dtype=float))


def sqrt_symbol(kappa):
    """Principal symbol -1/2*sqrt(xi^2 - kappa^2), branch forced to Im > 0.

    The principal square root of xi^2 - kappa^2 already has negative
    imaginary part for Re kappa > 0, Im kappa > 0; the sign flip guard keeps
    the rule constructive for edge inputs.
    """
    kappa = complex(kappa)

    def fn(xi):
        root = np.sqrt(xi.astype(complex) ** 2 - kappa**2)
        flip = np.imag(root) >= 0
        root = np.where(flip, -root, root)
        return -0.5 * root

    return FourierSymbol(fn, branch="im-positive")


def reciprocal_symbol(symbol):
    return FourierSymbol(lambda xi: 1.0 / symbol(xi), branch=symbol.branch)


def apply_multiplier(symbol, mesh, density):
    """Apply a Fourier multiplier in the mesh parameter.

    Mode m is scaled by p(xi_m) with xi_m = m * 2*pi / L where L is the
    curve perimeter, so integer modes on the unit circle see xi = m.
    """
    density = np.asarray(density, dtype=complex)
    N = len(density)
    if N != mesh.N:
        raise ValueError(f"density length {N} != mesh size {mesh.N}")
    xi = _modes(N) * (TWO_PI / mesh.curve.perimeter)
    return np.fft.ifft(symbol(xi) * np.fft.fft(density))


def multiplier_matrix(symbol, mesh):
    """Dense matrix of :func:`apply_multiplier` (for LU-based compositions)."""
    N = mesh.N
    xi = _modes(N) * (TWO_PI / mesh.curve.perimeter)
    p = symbol(xi)
    F = np.fft.fft(np.eye(N), axis=0)
    return np.fft.ifft(p[:, None] * F, axis=0)


@dataclass(frozen=True)
class GridTransfer:
    """Fourier-space transfer between shifted uniform grids.

    extend: zero padding N_src -> N_dst (N_dst >= N_src);
    project: mode cutoff N_src -> N_dst (N_dst <= N_src).
    project(extend(x)) == x on the smaller grid's trigonometric space.
    """

    n_src: int
    n_dst: int
    shift_src: float
    shift_dst: float

    def __post_init__(self):
        if self.n_src % 2 or self.n_dst % 2:
            raise ValueError("grid transfer requires even sizes")

    def __call__(self, values):
        values = np.asarray(values, dtype=complex)
        if len(values) != self.n_src:
            raise ValueError(f"expected length {self.n_src}, got {len(values)}")
        c = coefficients(values, self.shift_src)
        ns, nd = self.n_src, self.n_dst
        out = np.zeros(nd, dtype=complex)
        keep = min(ns, nd)
        h = keep // 2
        out[:h] = c[:h]
        out[-h:] = c[ns - h:ns] if nd >= ns else c[ns - h:ns]
        return synthesize(out, self.shift_dst)

    def matrix(self):
        M = np.empty((self.n_dst, self.n_src), dtype=complex)
        eye = np.eye(self.n_src)
        for j in range(self.n_src):
            M[:, j] = self(eye[:, j])
        return M


def make_transfers(mesh_small, mesh_large):
    """(extend small->large, project large->small) between two meshes."""
    E = GridTransfer(mesh_small.N, mesh_large.N, mesh_small.shift, mesh_large.shift)
    P = GridTransfer(mesh_large.N, mesh_small.N, mesh_large.shift, mesh_small.shift)
    return E, P

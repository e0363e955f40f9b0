import numpy as np
import pytest
from scipy.interpolate import pade as taylor_pade
from scipy.special import binom

from helmddm import geometry as geom
from helmddm.fourier import sqrt_symbol
from helmddm.nystrom import Wavenumber
from helmddm.transmission import (CutoffFunction, PadeCoefficients,
                                  build_transmission, coercivity_check,
                                  pade_symbol, sandwich)


def test_scalar_family_exact(circle_mesh_64):
    kap1 = 4 + 1j * 4 ** (1 / 3)
    op = build_transmission("Za", circle_mesh_64, kap1, 1.0)
    target = -1j * (4 + 1j * 4 ** (1 / 3))
    assert np.abs(op.matrix - target * np.eye(64)).max() < 1e-14


def test_hypersingular_family_modal(circle_mesh_64):
    from scipy.special import h1vp, jvp
    mesh = circle_mesh_64
    kap = Wavenumber.damped(2.0).value
    op = build_transmission("Z", mesh, kap, 1.0)
    m = 4
    phi = np.exp(1j * m * mesh.t)
    target = -2.0 * 0.5j * np.pi * kap**2 * jvp(m, kap) * h1vp(m, kap)
    assert np.abs((op.matrix @ phi) / phi - target).max() < 1e-10


def test_pade_seed_invariants():
    for p in (1, 4, 9):
        pc = PadeCoefficients.build(p)
        j = np.arange(1, p + 1)
        assert np.allclose(pc.a, 2.0 / (2 * p + 1) * np.sin(j * np.pi / (2 * p + 1)) ** 2)
        assert np.allclose(pc.b, np.cos(j * np.pi / (2 * p + 1)) ** 2)
    with pytest.raises(ValueError):
        PadeCoefficients.build(0)


def test_pade_partial_fraction_matches_diagonal_pade():
    """R_p is the [p/p] Pade approximant of sqrt(1+z): compare against an
    independent construction from the Taylor series."""
    p = 5
    pc = PadeCoefficients.build(p)
    coeffs = [binom(0.5, k) for k in range(2 * p + 1)]
    num, den = taylor_pade(coeffs, p)
    z = np.linspace(-0.6, 0.6, 41)
    closed = num(z) / den(z)
    partial = pc.rational(pc.a, pc.b, z)
    assert np.abs(partial - closed).max() < 1e-13


def test_pade_symbol_converges_to_sqrt_branch():
    kap = 8 + 1j * 8 ** (1 / 3)
    target = sqrt_symbol(kap)
    xi = np.linspace(-2 * abs(kap), 2 * abs(kap), 201)
    prev = np.inf
    for p in (2, 4, 8, 16, 32):
        approx = pade_symbol(PadeCoefficients.build(p), kap)(xi)
        err = np.abs(approx - target(xi)).max() / np.abs(target(xi)).max()
        assert err < prev
        prev = err
    assert prev < 1e-3


def test_pade_operator_modal(circle_mesh_64):
    mesh = circle_mesh_64
    kap = 4 + 1j * 4 ** (1 / 3)
    op = build_transmission("ZPade", mesh, kap, 1.0, pade_order=32)
    zps = build_transmission("ZPS", mesh, kap, 1.0)
    for m in (0, 3, 7):
        phi = np.exp(1j * m * mesh.t)
        a = (op.matrix @ phi) / phi
        b = (zps.matrix @ phi) / phi
        assert np.abs(a - b).max() < 1e-3 * np.abs(b).max()


def test_unknown_family_and_bad_order(circle_mesh_64):
    with pytest.raises(ValueError):
        build_transmission("Zx", circle_mesh_64, 2 + 1j, 1.0)
    with pytest.raises(ValueError):
        build_transmission("ZPade", circle_mesh_64, 2 + 1j, 1.0, pade_order=0)


def test_cutoff_properties():
    mesh = geom.build_graded_mesh(geom.square(4.0), 128, 3)
    chi = CutoffFunction.build(mesh, 1, width=0.1)
    v = chi.values
    assert np.all((0.0 <= v) & (v <= 1.0))
    idx = mesh.nodes_in_panels([1])
    core = idx[(mesh.local_u[idx] > 0.2) & (mesh.local_u[idx] < 0.8)]
    assert np.allclose(v[core], 1.0)
    outside = np.setdiff1d(np.arange(mesh.N), idx)
    assert np.abs(v[outside]).max() == 0.0
    with pytest.raises(ValueError):
        CutoffFunction.build(mesh, 1, width=0.7)


def test_sandwich_annihilates_outside_support(circle_mesh_64):
    mesh = geom.build_graded_mesh(geom.square(4.0), 128, 3)
    kap = Wavenumber.damped(2.0).value
    z = build_transmission("Z", mesh, kap, 1.0, oversample=False)
    chi = CutoffFunction.build(mesh, 0, width=0.1)
    zs = sandwich(chi, z.matrix)
    # density supported away from the sandwiched arc maps to zero
    dens = np.zeros(mesh.N, dtype=complex)
    dens[mesh.nodes_in_panels([2])] = 1.0
    assert np.abs(zs @ dens).max() < 1e-12
    # output supported strictly inside the arc
    out = zs @ np.ones(mesh.N)
    assert np.abs(out[np.setdiff1d(np.arange(mesh.N), mesh.nodes_in_panels([0]))]).max() == 0


def test_coercivity_signs(circle_mesh_64):
    mesh = circle_mesh_64
    kap0 = Wavenumber.damped(2.0).value
    kap1 = Wavenumber.damped(4.0).value
    # Z_1 = -2 a0 N_{kappa_0} and Z_0 = -2 a1 N_{kappa_1}: both Im < 0
    for kap in (kap0, kap1):
        op = build_transmission("Z", mesh, kap, 1.0)
        vals, npos, nneg = coercivity_check(op, mesh, trials=100, seed=3)
        assert nneg == 100 and npos == 0
    # scalar family: Im<Z phi, phi> = -alpha*k*||phi||^2 < 0 analytically
    op = build_transmission("Za", mesh, kap1, 1.0)
    vals, npos, nneg = coercivity_check(op, mesh, trials=50, seed=1)
    assert nneg == 50
    # zero density gives a zero form
    w = mesh.weights
    z = op.matrix @ np.zeros(mesh.N)
    assert np.imag(np.sum(z * 0 * w)) == 0.0


def test_localization_width_consistency():
    """Shrinking the transition width moves the sandwiched operator toward
    the arcwise-applied global operator (monotone over three widths)."""
    mesh = geom.build_graded_mesh(geom.square(4.0), 128, 3)
    kap = Wavenumber.damped(2.0).value
    z = build_transmission("Z", mesh, kap, 1.0, oversample=False)
    idx = mesh.nodes_in_panels([0])
    mask = np.zeros(mesh.N)
    mask[idx] = 1.0
    arcwise = mask[:, None] * z.matrix * mask[None, :]
    diffs = []
    for width in (0.2, 0.1, 0.05):
        chi = CutoffFunction.build(mesh, 0, width=width)
        zs = sandwich(chi, z.matrix)
        diffs.append(np.linalg.norm(zs - arcwise, 2))
    assert diffs[0] > diffs[1] > diffs[2]

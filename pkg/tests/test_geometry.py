import numpy as np
import pytest

from helmddm import geometry as geom


def test_circle_uniform_nodes():
    mesh = geom.build_graded_mesh(geom.circle(1.0), 8, 3, shift=0.0)
    assert np.allclose(mesh.t, 2 * np.pi * np.arange(8) / 8)
    assert np.allclose(mesh.jac, 1.0)


def test_rejects_odd_n_and_bad_degree():
    with pytest.raises(geom.GeometryError):
        geom.build_graded_mesh(geom.circle(1.0), 63)
    with pytest.raises(geom.GeometryError):
        geom.build_graded_mesh(geom.circle(1.0), 64, 1)


def test_node_on_corner_rejected():
    # zero shift puts the first node exactly on a square corner
    with pytest.raises(geom.GeometryError):
        geom.build_graded_mesh(geom.square(4.0), 64, 3, shift=0.0)


def test_square_grading_symmetric_and_cubic():
    N = 64
    mesh = geom.build_graded_mesh(geom.square(4.0), N, 3, shift=0.5 / N)
    # 16 nodes per edge, placements symmetric about the edge midpoint
    for p in range(4):
        u = mesh.local_u[mesh.panel_slice(p)]
        assert np.allclose(u, 1.0 - u[::-1], atol=1e-14)
    # minimum node spacing near corners scales like the cube of the step
    d = np.linalg.norm(np.diff(mesh.points, axis=0), axis=1)
    h = 2 * np.pi / N
    assert d.min() < 4.0 * h**3
    m2 = geom.build_graded_mesh(geom.square(4.0), 2 * N, 3, shift=0.25 / N)
    d2 = np.linalg.norm(np.diff(m2.points, axis=0), axis=1)
    ratio = d.min() / d2.min()
    assert 6.0 < ratio < 10.0   # eight-fold for a cubic map


def test_lshape_mesh_no_node_near_corner():
    mesh = geom.build_graded_mesh(geom.l_shape(4.0), 72, 3)
    assert mesh.curve.n_panels == 6
    graded_breaks = mesh.breaks[:-1]
    dist = np.abs(mesh.t[:, None] - graded_breaks[None, :])
    dist = np.minimum(dist, 2 * np.pi - dist)
    assert dist.min() > 1e-12


def test_grading_map_monotone_bijection():
    s = np.linspace(0, 1, 1001)
    for p in (2, 3, 4):
        w = geom._grade(s, p)
        assert w[0] == 0 and w[-1] == 1
        assert np.all(np.diff(w) > 0)
        # composition with the uniform grid reproduces the mesh nodes
        mesh = geom.build_graded_mesh(geom.square(4.0), 64, p)
        prm = mesh.curve.panels[mesh.panel_of[5]]
        assert np.allclose(mesh.points[5],
                           prm.point(geom._grade((5 + 0.5) / 16, p)), atol=1e-14)


@pytest.mark.parametrize("curve,exact", [
    (geom.circle(1.0), 2 * np.pi),
    (geom.square(4.0), 16.0),
    (geom.l_shape(4.0), 16.0),
])
def test_arclength_convergence(curve, exact):
    errs = []
    for N in (48, 96, 192):
        mesh = geom.build_graded_mesh(curve, N, 3)
        errs.append(abs(mesh.arclength() - exact))
    if errs[0] < 1e-12:        # circle: trapezoid exact
        assert errs[-1] < 1e-12
    else:                      # graded corners: order >= 3
        assert errs[0] / errs[1] > 8 * 0.9
        assert errs[1] / errs[2] > 8 * 0.9


@pytest.mark.parametrize("scheme,nsub,ncross", [
    ("half-circle", 2, 2), ("quarter-circle", 4, 5), ("lshape3", 3, 3)])
def test_partitions(scheme, nsub, ncross):
    part = geom.subdivide_domain(geom.circle(1.0), scheme, size=4.0)
    assert part.n_subdomains == nsub
    assert len(part.cross_points) == ncross
    meshes, ext_mesh = geom.mesh_partition(part, 64)
    # shared arcs sampled at identical points from both sides
    for arc in part.interfaces:
        dom_a, pa = arc.side_a
        dom_b, pb = arc.side_b
        mesh_a = meshes[dom_a]
        mesh_b = ext_mesh if dom_b == geom.EXTERIOR else meshes[dom_b]
        ia, ib = geom.matched_arc_indices(mesh_a, pa, mesh_b, pb, arc.reversed)
        assert np.abs(mesh_a.points[ia] - mesh_b.points[ib]).max() < 1e-12


def test_partition_none():
    part = geom.subdivide_domain(geom.circle(1.0), "none")
    assert part.n_subdomains == 1
    assert part.interior_interfaces() == []
    with pytest.raises(geom.GeometryError):
        geom.subdivide_domain(geom.circle(1.0), "nonsense")


def test_polygon_loader(tmp_path):
    path = tmp_path / "poly.txt"
    path.write_text("# a triangle\n0 0\n1 0\n0.5 1\n")
    curve = geom.load_polygon(path)
    assert curve.n_panels == 3
    assert abs(curve.perimeter - (1 + 2 * np.hypot(0.5, 1))) < 1e-14

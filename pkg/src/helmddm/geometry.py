"""Parametrized closed curves, corner-graded meshes, and domain partitions.

A curve is a closed chain of smooth panels (line segments, circular arcs).
Meshes place a uniform-in-parameter grid, composed panel-wise with a
polynomial sigmoid grading that accumulates nodes toward flagged junctions
(corners, triple points, coating junctions).  Node placement within a panel
is symmetric under orientation reversal, so two subdomains sharing a panel
sample it at identical physical points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

EXTERIOR = -1  # interface side marker: the unbounded domain


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Panels
# ---------------------------------------------------------------------------

class Panel:
    """Smooth curve piece on the local coordinate u in [0, 1], constant speed."""

    length: float
    label: str

    def point(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def deriv(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def deriv2(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class LinePanel(Panel):
    def __init__(self, p0, p1, label=""):
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        self.length = float(np.linalg.norm(self.p1 - self.p0))
        if self.length == 0.0:
            raise GeometryError("degenerate line panel")
        self.label = label

    def point(self, u):
        u = np.asarray(u, dtype=float)[..., None]
        return self.p0 + u * (self.p1 - self.p0)

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(self.p1 - self.p0, u.shape + (2,)).copy()

    def deriv2(self, u):
        u = np.asarray(u, dtype=float)
        return np.zeros(u.shape + (2,))


class ArcPanel(Panel):
    """Circular arc from angle a0 to a1 (a1 > a0 traverses counterclockwise)."""

    def __init__(self, center, radius, a0, a1, label=""):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.a0 = float(a0)
        self.a1 = float(a1)
        if self.radius <= 0 or self.a1 == self.a0:
            raise GeometryError("degenerate arc panel")
        self.length = self.radius * abs(self.a1 - self.a0)
        self.label = label

    def _ang(self, u):
        return self.a0 + np.asarray(u, dtype=float) * (self.a1 - self.a0)

    def point(self, u):
        a = self._ang(u)
        return self.center + self.radius * np.stack([np.cos(a), np.sin(a)], axis=-1)

    def deriv(self, u):
        a = self._ang(u)
        da = self.a1 - self.a0
        return self.radius * da * np.stack([-np.sin(a), np.cos(a)], axis=-1)

    def deriv2(self, u):
        a = self._ang(u)
        da = self.a1 - self.a0
        return -self.radius * da * da * np.stack([np.cos(a), np.sin(a)], axis=-1)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass
class Curve:
    """Closed counterclockwise chain of panels.

    ``graded[i]`` flags the junction at the start of panel ``i``: meshes
    accumulate nodes toward graded junctions.  The outward normal of the
    enclosed region is ``(y', -x') / |x'|`` for counterclockwise orientation.
    """

    panels: list
    graded: list
    name: str = "curve"

    def __post_init__(self):
        if len(self.panels) != len(self.graded):
            raise GeometryError("graded flags must match panel count")

    @property
    def n_panels(self):
        return len(self.panels)

    @property
    def perimeter(self):
        return sum(p.length for p in self.panels)

    def corner_fractions(self):
        """Graded-junction positions as fractions of total arclength."""
        lens = np.array([p.length for p in self.panels])
        cum = np.concatenate([[0.0], np.cumsum(lens)]) / lens.sum()
        return np.array([cum[i] for i in range(self.n_panels) if self.graded[i]])


def circle(radius=1.0, center=(0.0, 0.0)):
    return Curve([ArcPanel(center, radius, 0.0, TWO_PI)], [False], name="circle")


def coated_circle(radius=1.0, pec_start=np.pi, pec_end=TWO_PI):
    """Circle whose arc [pec_start, pec_end] is the PEC portion (default: lower half)."""
    pt = ArcPanel((0, 0), radius, pec_end - TWO_PI, pec_start, label="T")
    pp = ArcPanel((0, 0), radius, pec_start, pec_end, label="PEC")
    return Curve([pt, pp], [True, True], name="coated-circle")


def polygon(vertices, name="polygon"):
    """Closed polygon from counterclockwise vertex list; all junctions graded."""
    vs = np.asarray(vertices, dtype=float)
    if vs.shape[0] < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    panels = [LinePanel(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]
    return Curve(panels, [True] * len(panels), name=name)


def square(side=4.0):
    h = side / 2.0
    return polygon([(-h, -h), (h, -h), (h, h), (-h, h)], name="square")


def l_shape(size=4.0):
    """Canonical L: square of side `size` minus its upper-right quadrant square."""
    s = size / 2.0
    return polygon(
        [(-s, -s), (s, -s), (s, 0.0), (0.0, 0.0), (0.0, s), (-s, s)],
        name="l-shape",
    )


def load_polygon(path):
    """Read a polygon from plain text: one 'x y' pair per line, '#' comments."""
    verts = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if not line:
                continue
            x, y = line.split()
            verts.append((float(x), float(y)))
    return polygon(verts, name="custom-polygon")


# ---------------------------------------------------------------------------
# Sigmoid grading
# ---------------------------------------------------------------------------

def _grade(s, p):
    """Polynomial sigmoid on [0,1]: s^p / (s^p + (1-s)^p), symmetric about 1/2."""
    a = s**p
    b = (1.0 - s) ** p
    return a / (a + b)


def _grade_d1(s, p):
    a = s**p
    b = (1.0 - s) ** p
    return p * s ** (p - 1) * (1.0 - s) ** (p - 1) / (a + b) ** 2


def _grade_d2(s, p):
    a = s**p
    b = (1.0 - s) ** p
    n = p * s ** (p - 1) * (1.0 - s) ** (p - 1)
    dn = p * (p - 1) * (s ** (p - 2) * (1.0 - s) ** (p - 1) - s ** (p - 1) * (1.0 - s) ** (p - 2))
    dab = p * (s ** (p - 1) - (1.0 - s) ** (p - 1))
    return dn / (a + b) ** 2 - 2.0 * n * dab / (a + b) ** 3


def _allocate(lengths, N, minimum=4):
    """Largest-remainder apportionment of N nodes proportional to panel lengths."""
    lengths = np.asarray(lengths, dtype=float)
    quota = lengths / lengths.sum() * N
    counts = np.maximum(np.floor(quota).astype(int), minimum)
    rem = N - counts.sum()
    if rem < 0:
        order = np.argsort(counts - quota)[::-1]
        for i in order:
            take = min(counts[i] - minimum, -rem)
            counts[i] -= take
            rem += take
            if rem == 0:
                break
        if rem != 0:
            raise GeometryError(f"cannot allocate N={N} over {len(lengths)} panels")
    else:
        order = np.argsort(quota - counts)[::-1]
        for i in order[:rem]:
            counts[i] += 1
    return counts


# ---------------------------------------------------------------------------
# Graded mesh
# ---------------------------------------------------------------------------

@dataclass
class GradedMesh:
    """Corner-graded Nystrom mesh.

    Nodes are the image of the shifted uniform grid t_m = 2*pi*(m/N + shift)
    under the panel-wise grading map.  ``jac`` holds |dy/dt| at the nodes
    (the quadrature weight carrier), ``normals`` the outward unit normals.
    """

    curve: Curve
    N: int
    degree: int
    shift: float
    counts: np.ndarray
    breaks: np.ndarray          # panel boundaries in mesh parameter, len n_panels+1
    t: np.ndarray               # node parameters in [0, 2*pi)
    points: np.ndarray          # (N, 2)
    jac: np.ndarray             # (N,) |y'(t_m)|
    normals: np.ndarray         # (N, 2)
    d1: np.ndarray              # (N, 2) y'(t_m)
    d2: np.ndarray              # (N, 2) y''(t_m)
    panel_of: np.ndarray        # (N,) panel index
    local_u: np.ndarray         # (N,) post-grading panel coordinate in (0, 1)

    @property
    def weights(self):
        """Trapezoidal arclength weights w_m * (2*pi/N)."""
        return self.jac * (TWO_PI / self.N)

    def panel_slice(self, i):
        """Node index range of panel i."""
        start = int(self.counts[:i].sum())
        return slice(start, start + int(self.counts[i]))

    def nodes_in_panels(self, panel_ids):
        idx = []
        for i in panel_ids:
            sl = self.panel_slice(i)
            idx.extend(range(sl.start, sl.stop))
        return np.array(idx, dtype=int)

    def arclength(self):
        return float(np.sum(self.weights))


def build_graded_mesh(curve, N, degree=3, shift=None, counts=None):
    """Build a graded mesh with N nodes (N even) on a closed curve.

    shift is a fraction of the full period 2*pi; the default half grid step
    keeps every node away from panel junctions.  Raises if a node lands on a
    junction (within 1e-12 in parameter).
    """
    if N % 2 != 0:
        raise GeometryError(f"N must be even, got {N}")
    if degree < 2:
        raise GeometryError(f"grading degree must be >= 2, got {degree}")
    if shift is None:
        shift = 0.5 / N
    if not (0.0 <= shift < 1.0):
        raise GeometryError("shift must be a fraction in [0, 1)")

    lengths = [p.length for p in curve.panels]
    if counts is None:
        counts = _allocate(lengths, N) if curve.n_panels > 1 else np.array([N])
    else:
        counts = np.asarray(counts, dtype=int)
        if counts.sum() != N:
            raise GeometryError("panel counts must sum to N")
    breaks = TWO_PI * np.concatenate([[0], np.cumsum(counts)]) / N

    pos = np.arange(N) + N * shift          # grid position in units of 2*pi/N
    t = TWO_PI * pos / N
    cum = np.concatenate([[0], np.cumsum(counts)])
    panel_of = np.searchsorted(cum, pos, side="right") - 1
    if np.any(panel_of < 0) or np.any(panel_of >= curve.n_panels):
        raise GeometryError("node outside parameter range")
    graded_breaks = np.array(
        [breaks[i] for i in range(curve.n_panels) if curve.graded[i]])
    if graded_breaks.size:
        dist = np.abs(t[:, None] - graded_breaks[None, :])
        dist = np.minimum(dist, TWO_PI - dist)
        if dist.min() < 1e-12:
            raise GeometryError("a mesh node coincides with a corner/junction parameter")

    points = np.empty((N, 2))
    d1 = np.empty((N, 2))
    d2 = np.empty((N, 2))
    local_u = np.empty(N)
    p = degree
    for i, panel in enumerate(curve.panels):
        sel = panel_of == i
        if not np.any(sel):
            continue
        n_i = counts[i]
        s = (pos[sel] - cum[i]) / n_i   # uniform local coordinate in (0, 1)
        grade_start = curve.graded[i]
        grade_end = curve.graded[(i + 1) % curve.n_panels]
        if grade_start or grade_end:
            u = _grade(s, p)
            gp = _grade_d1(s, p)
            gpp = _grade_d2(s, p)
        else:
            u, gp, gpp = s, np.ones_like(s), np.zeros_like(s)
        # chain rule through t -> s -> u -> panel
        dsdt = N / (TWO_PI * n_i)
        P1 = panel.deriv(u)
        points[sel] = panel.point(u)
        d1[sel] = P1 * (gp * dsdt)[:, None]
        d2[sel] = (panel.deriv2(u) * (gp**2)[:, None] + P1 * gpp[:, None]) * dsdt**2
        local_u[sel] = u

    jac = np.linalg.norm(d1, axis=1)
    normals = np.stack([d1[:, 1], -d1[:, 0]], axis=1) / jac[:, None]
    return GradedMesh(
        curve=curve, N=N, degree=degree, shift=shift, counts=counts,
        breaks=breaks, t=t, points=points, jac=jac, normals=normals,
        d1=d1, d2=d2, panel_of=panel_of, local_u=local_u,
    )


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------

@dataclass
class InterfaceArc:
    """Shared panel between two domains; EXTERIOR marks the unbounded side.

    (domain, panel) index the owning curve's panel list.  ``reversed`` is True
    when the two owners traverse the shared panel in opposite directions
    (always the case between two interior subdomains).
    """

    side_a: tuple      # (domain index, panel index in that curve)
    side_b: tuple
    reversed: bool


@dataclass
class SubdomainPartition:
    subdomains: list            # list[Curve]
    exterior: Curve             # Gamma, counterclockwise, panels matching arcs
    interfaces: list            # list[InterfaceArc]; includes exterior-facing arcs
    cross_points: np.ndarray    # (n, 2)
    scheme: str

    @property
    def n_subdomains(self):
        return len(self.subdomains)

    def interior_interfaces(self):
        return [a for a in self.interfaces if a.side_a[0] != EXTERIOR and a.side_b[0] != EXTERIOR]

    def exterior_arcs(self, j):
        """Interfaces between subdomain j and the unbounded domain."""
        out = []
        for a in self.interfaces:
            if a.side_a[0] == j and a.side_b[0] == EXTERIOR:
                out.append(a)
        return out


def _partition_none(curve):
    arcs = [InterfaceArc((0, i), (EXTERIOR, i), False) for i in range(curve.n_panels)]
    return SubdomainPartition([curve], curve, arcs, np.zeros((0, 2)), "none")


def _partition_half_circle(radius):
    upper = Curve(
        [ArcPanel((0, 0), radius, 0.0, np.pi), LinePanel((-radius, 0), (radius, 0))],
        [True, True], name="half-circle-upper",
    )
    lower = Curve(
        [ArcPanel((0, 0), radius, np.pi, TWO_PI), LinePanel((radius, 0), (-radius, 0))],
        [True, True], name="half-circle-lower",
    )
    exterior = Curve(
        [ArcPanel((0, 0), radius, 0.0, np.pi), ArcPanel((0, 0), radius, np.pi, TWO_PI)],
        [True, True], name="circle",
    )
    interfaces = [
        InterfaceArc((0, 0), (EXTERIOR, 0), False),
        InterfaceArc((1, 0), (EXTERIOR, 1), False),
        InterfaceArc((0, 1), (1, 1), True),
    ]
    cross = np.array([[radius, 0.0], [-radius, 0.0]])
    return SubdomainPartition([upper, lower], exterior, interfaces, cross, "half-circle")


def _partition_quarter_circle(radius):
    subs, arcs = [], []
    ext_panels = []
    for q in range(4):
        a0, a1 = q * np.pi / 2, (q + 1) * np.pi / 2
        p_arc = ArcPanel((0, 0), radius, a0, a1)
        r_out = radius * np.array([np.cos(a0), np.sin(a0)])
        r_in = radius * np.array([np.cos(a1), np.sin(a1)])
        sub = Curve(
            [LinePanel((0, 0), r_out), p_arc, LinePanel(r_in, (0, 0))],
            [True, True, True], name=f"quarter-{q}",
        )
        subs.append(sub)
        ext_panels.append(ArcPanel((0, 0), radius, a0, a1))
        arcs.append(InterfaceArc((q, 1), (EXTERIOR, q), False))
    for q in range(4):
        # radius from center out at angle (q+1)*pi/2: panel 2 of q reversed vs panel 0 of q+1
        arcs.append(InterfaceArc((q, 2), ((q + 1) % 4, 0), True))
    exterior = Curve(ext_panels, [True] * 4, name="circle")
    cross = np.array(
        [[0.0, 0.0], [radius, 0.0], [0.0, radius], [-radius, 0.0], [0.0, -radius]]
    )
    return SubdomainPartition(subs, exterior, arcs, cross, "quarter-circle")


def _partition_lshape3(size):
    s = size / 2.0
    # subdomain squares (counterclockwise): lower-left, lower-right, upper-left
    s1 = polygon([(-s, -s), (0, -s), (0, 0), (-s, 0)], name="L-sub1")
    s2 = polygon([(0, -s), (s, -s), (s, 0), (0, 0)], name="L-sub2")
    s3 = polygon([(-s, 0), (0, 0), (0, s), (-s, s)], name="L-sub3")
    # Gamma split at the junctions (0,-s) and (-s,0) where interfaces meet it
    ext = Curve(
        [
            LinePanel((-s, -s), (0, -s)), LinePanel((0, -s), (s, -s)),
            LinePanel((s, -s), (s, 0)), LinePanel((s, 0), (0, 0)),
            LinePanel((0, 0), (0, s)), LinePanel((0, s), (-s, s)),
            LinePanel((-s, s), (-s, 0)), LinePanel((-s, 0), (-s, -s)),
        ],
        [True] * 8, name="l-shape",
    )
    arcs = [
        InterfaceArc((0, 0), (EXTERIOR, 0), False),   # s1 bottom
        InterfaceArc((1, 0), (EXTERIOR, 1), False),   # s2 bottom
        InterfaceArc((1, 1), (EXTERIOR, 2), False),   # s2 right
        InterfaceArc((1, 2), (EXTERIOR, 3), False),   # s2 top
        InterfaceArc((2, 1), (EXTERIOR, 4), False),   # s3 right (inner vertical)
        InterfaceArc((2, 2), (EXTERIOR, 5), False),   # s3 top
        InterfaceArc((2, 3), (EXTERIOR, 6), False),   # s3 left
        InterfaceArc((0, 3), (EXTERIOR, 7), False),   # s1 left
        InterfaceArc((0, 1), (1, 3), True),           # x=0: s1 right vs s2 left
        InterfaceArc((0, 2), (2, 0), True),           # y=0: s1 top vs s3 bottom
    ]
    cross = np.array([[0.0, 0.0], [0.0, -s], [-s, 0.0]])
    return SubdomainPartition([s1, s2, s3], ext, arcs, cross, "lshape3")


def subdivide_domain(curve, scheme, size=None):
    """Build a named subdomain decomposition.

    scheme in {'none', 'half-circle', 'quarter-circle', 'lshape3'}.  The
    circle schemes take the radius from the given circle curve; lshape3
    takes the L size (curve may be None for the named schemes).
    """
    if scheme == "none":
        if not isinstance(curve, Curve):
            raise GeometryError("'none' scheme needs a Curve")
        return _partition_none(curve)
    if scheme in ("half-circle", "quarter-circle"):
        radius = size if size is not None else 1.0
        if isinstance(curve, Curve) and isinstance(curve.panels[0], ArcPanel):
            radius = curve.panels[0].radius
        if scheme == "half-circle":
            return _partition_half_circle(radius)
        return _partition_quarter_circle(radius)
    if scheme == "lshape3":
        sz = size if size is not None else 4.0
        return _partition_lshape3(sz)
    raise GeometryError(f"unknown subdivision scheme: {scheme}")


def mesh_partition(partition, N0, degree=3):
    """Mesh every curve of a partition with a shared per-panel node budget.

    N0 sets the target density via the exterior perimeter.  Each physical
    panel gets one even node count, so adjacent meshes sample identical
    points and every curve total stays even.  Returns
    (subdomain meshes, exterior mesh).
    """
    ext = partition.exterior
    density = N0 / ext.perimeter

    def panel_count(panel):
        n = max(int(round(density * panel.length)), 4)
        return n + (n % 2)

    # one count per physical panel, keyed by (domain, panel index); interface
    # records tie the two owners of a shared panel to the same count
    counts = {}
    for arc in partition.interfaces:
        dom_a, pa = arc.side_a
        panel = partition.subdomains[dom_a].panels[pa] if dom_a != EXTERIOR else ext.panels[pa]
        n = panel_count(panel)
        counts[arc.side_a] = n
        counts[arc.side_b] = n
    meshes = []
    for j, sub in enumerate(partition.subdomains):
        cj = []
        for i in range(sub.n_panels):
            if (j, i) not in counts:
                counts[(j, i)] = panel_count(sub.panels[i])
            cj.append(counts[(j, i)])
        Nj = int(sum(cj))
        meshes.append(build_graded_mesh(sub, Nj, degree, 0.5 / Nj, counts=np.array(cj)))
    ce = [counts[(EXTERIOR, i)] for i in range(ext.n_panels)]
    Ne = int(sum(ce))
    ext_mesh = build_graded_mesh(ext, Ne, degree, 0.5 / Ne, counts=np.array(ce))
    return meshes, ext_mesh


def matched_arc_indices(mesh_a, panel_a, mesh_b, panel_b, reverse):
    """Node index pairs (in a, in b) for a shared panel; counts must agree."""
    ia = mesh_a.nodes_in_panels([panel_a])
    ib = mesh_b.nodes_in_panels([panel_b])
    if len(ia) != len(ib):
        raise GeometryError("shared panel meshed with different node counts")
    if reverse:
        ib = ib[::-1]
    return ia, ib

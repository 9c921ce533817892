"""Interface geometry on unfitted meshes.

The interface is the zero set of a level-set function d, negative inside
the enclosed subdomain and positive outside.  The discrete interface is
the zero set of the nodal interpolant of d, a segment (2D) or planar
polygon (3D) inside every element whose nodal values change sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .mesh import Mesh, p1_gradients

__all__ = [
    "LevelSet",
    "DiscreteLevelSet",
    "Classification",
    "CutElement",
    "SurfacePatch",
    "InterfaceResolutionError",
    "DegenerateCutError",
    "circle",
    "sphere",
    "plane",
    "discretize",
    "classify",
    "edge_root",
    "cut_simplex",
    "cut_element",
    "build_patch",
    "avg_over_patch",
    "closest_point",
]

ZERO_SHIFT = 1e-12  # relative nodal zero perturbation, in units of h


class InterfaceResolutionError(Exception):
    """The interface cannot be located where the discretization needs it."""


class DegenerateCutError(Exception):
    """A nodal level-set value is exactly zero on a cut element."""


@dataclass(frozen=True)
class LevelSet:
    """Level-set description of an interface.

    ``value`` and ``gradient`` accept (n, dim) arrays and return (n,)
    and (n, dim) arrays.
    """

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    dim: int

    def normal(self, points: np.ndarray) -> np.ndarray:
        g = self.gradient(np.atleast_2d(points))
        return g / np.linalg.norm(g, axis=1)[:, None]


def circle(center, radius: float) -> LevelSet:
    """Signed distance to a circle, negative inside."""
    c = np.asarray(center, dtype=float)

    def value(p):
        return np.linalg.norm(p - c, axis=1) - radius

    def gradient(p):
        d = p - c
        return d / np.linalg.norm(d, axis=1)[:, None]

    return LevelSet(value=value, gradient=gradient, dim=2)


def sphere(center, radius: float) -> LevelSet:
    c = np.asarray(center, dtype=float)

    def value(p):
        return np.linalg.norm(p - c, axis=1) - radius

    def gradient(p):
        d = p - c
        return d / np.linalg.norm(d, axis=1)[:, None]

    return LevelSet(value=value, gradient=gradient, dim=3)


def plane(normal, offset: float, dim: int | None = None) -> LevelSet:
    """Half-space level set n.x - offset with |n| normalized."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)

    def value(p):
        return p @ n - offset

    def gradient(p):
        return np.broadcast_to(n, p.shape).copy()

    return LevelSet(value=value, gradient=gradient, dim=dim or n.shape[0])


@dataclass
class DiscreteLevelSet:
    """Nodal interpolant of a level set on a mesh.

    Nodal values that are exactly zero are shifted to +ZERO_SHIFT * h so
    that every element is either strictly one-sided or properly cut.
    """

    mesh: Mesh
    levelset: LevelSet
    nodal_values: np.ndarray
    elem_gradients: np.ndarray  # (ne, dim) gradient of the interpolant

    def element_values(self, eid: int) -> np.ndarray:
        return self.nodal_values[self.mesh.elements[eid]]

    def value_at(self, points: np.ndarray, eid: int) -> np.ndarray:
        """Evaluate the interpolant of element ``eid`` at given points."""
        v0 = self.mesh.nodes[self.mesh.elements[eid, 0]]
        d0 = self.nodal_values[self.mesh.elements[eid, 0]]
        return (np.atleast_2d(points) - v0) @ self.elem_gradients[eid] + d0


def discretize(levelset: LevelSet, mesh: Mesh) -> DiscreteLevelSet:
    vals = np.asarray(levelset.value(mesh.nodes), dtype=float).copy()
    vals[vals == 0.0] = ZERO_SHIFT * mesh.h
    grads = np.einsum("ejd,ej->ed", p1_gradients(mesh), vals[mesh.elements])
    return DiscreteLevelSet(
        mesh=mesh, levelset=levelset, nodal_values=vals, elem_gradients=grads
    )


@dataclass
class Classification:
    """Element and face labels relative to the discrete interface."""

    element_labels: np.ndarray  # +1, -1, or 0 for cut
    interface_faces: np.ndarray  # bool per face, nodal sign change
    cut_elements: np.ndarray  # indices of cut elements

    @property
    def n_cut(self) -> int:
        return self.cut_elements.shape[0]


def classify(dls: DiscreteLevelSet) -> Classification:
    mesh = dls.mesh
    signs = np.sign(dls.nodal_values)
    esigns = signs[mesh.elements]
    labels = np.zeros(mesh.n_elements, dtype=np.int8)
    labels[np.all(esigns > 0, axis=1)] = 1
    labels[np.all(esigns < 0, axis=1)] = -1
    fsigns = signs[mesh.faces]
    interface_faces = np.any(fsigns > 0, axis=1) & np.any(fsigns < 0, axis=1)
    return Classification(
        element_labels=labels,
        interface_faces=interface_faces,
        cut_elements=np.flatnonzero(labels == 0),
    )


def edge_root(a, b, da: float, db: float) -> np.ndarray:
    """Zero of the linear interpolant between vertex values da and db."""
    t = da / (da - db)
    return np.asarray(a) + t * (np.asarray(b) - np.asarray(a))


@dataclass
class CutElement:
    """Geometry of one element cut by the discrete interface.

    ``sub_simplices`` is a list of (vertices, side) pairs exactly tiling
    the element; ``gamma_poly`` is the cyclically ordered intersection
    of the interface plane with the element.  The frame (t_frame rows,
    then normal) is right-handed and orthonormal; the normal points from
    the minus to the plus side.
    """

    eid: int
    dim: int
    vertices: np.ndarray
    nodal_values: np.ndarray
    vertex_sides: np.ndarray  # +-1 per local vertex
    sub_simplices: list
    gamma_poly: np.ndarray
    x_star: np.ndarray
    normal: np.ndarray
    t_frame: np.ndarray  # (dim-1, dim)
    h_T: float
    topology: str
    cut_edges: list = field(default_factory=list)  # (local i, local j, point)

    @property
    def volume(self) -> float:
        from .mesh import simplex_volume

        return abs(simplex_volume(self.vertices))


def cut_simplex(vertices: np.ndarray, nodal_values: np.ndarray, eid: int = -1) -> CutElement:
    """Cut a single simplex by the zero set of its nodal interpolant.

    Raises
    ------
    DegenerateCutError
        If a nodal value is exactly zero.
    ValueError
        If the values do not change sign.
    """
    vertices = np.asarray(vertices, dtype=float)
    vals = np.asarray(nodal_values, dtype=float)
    dim = vertices.shape[1]
    if np.any(vals == 0.0):
        raise DegenerateCutError(
            f"element {eid}: nodal level-set value is exactly zero; "
            "perturb the nodal values before cutting"
        )
    minus = np.flatnonzero(vals < 0.0)
    plus = np.flatnonzero(vals > 0.0)
    if minus.size == 0 or plus.size == 0:
        raise ValueError(f"element {eid} is not cut (uniform nodal sign)")

    sides = np.where(vals > 0.0, 1, -1).astype(np.int8)
    if dim == 2:
        subs, gamma, cut_edges, topo = _cut_triangle(vertices, vals, minus, plus)
    else:
        subs, gamma, cut_edges, topo = _cut_tet(vertices, vals, minus, plus)

    x_star = _polygon_centroid(gamma)
    normal, t_frame = _interface_frame(vertices, vals, dim)
    diffs = vertices[:, None, :] - vertices[None, :, :]
    h_T = float(np.sqrt((diffs ** 2).sum(axis=2).max()))

    return CutElement(
        eid=eid,
        dim=dim,
        vertices=vertices,
        nodal_values=vals,
        vertex_sides=sides,
        sub_simplices=subs,
        gamma_poly=gamma,
        x_star=x_star,
        normal=normal,
        t_frame=t_frame,
        h_T=h_T,
        topology=topo,
        cut_edges=cut_edges,
    )


def cut_element(dls: DiscreteLevelSet, eid: int) -> CutElement:
    mesh = dls.mesh
    return cut_simplex(mesh.nodes[mesh.elements[eid]], dls.element_values(eid), eid=eid)


def _cut_triangle(verts, vals, minus, plus):
    lone, rest = (minus, plus) if minus.size == 1 else (plus, minus)
    j0 = int(lone[0])
    j1, j2 = int(rest[0]), int(rest[1])
    s_lone = -1 if vals[j0] < 0 else 1
    c1 = edge_root(verts[j0], verts[j1], vals[j0], vals[j1])
    c2 = edge_root(verts[j0], verts[j2], vals[j0], vals[j2])
    subs = [
        (np.array([verts[j0], c1, c2]), s_lone),
        (np.array([c1, verts[j1], verts[j2]]), -s_lone),
        (np.array([c1, verts[j2], c2]), -s_lone),
    ]
    gamma = np.array([c1, c2])
    cut_edges = [(j0, j1, c1), (j0, j2, c2)]
    return subs, gamma, cut_edges, "2d"


def _cut_tet(verts, vals, minus, plus):
    if minus.size == 1 or plus.size == 1:
        lone, rest = (minus, plus) if minus.size == 1 else (plus, minus)
        j0 = int(lone[0])
        s_lone = -1 if vals[j0] < 0 else 1
        r = [int(j) for j in rest]
        c = [edge_root(verts[j0], verts[j], vals[j0], vals[j]) for j in r]
        v1, v2, v3 = (verts[j] for j in r)
        subs = [
            (np.array([verts[j0], c[0], c[1], c[2]]), s_lone),
            (np.array([v1, c[0], c[1], c[2]]), -s_lone),
            (np.array([v1, c[1], c[2], v3]), -s_lone),
            (np.array([v1, c[1], v3, v2]), -s_lone),
        ]
        gamma = np.array(c)
        cut_edges = [(j0, r[k], c[k]) for k in range(3)]
        return subs, gamma, cut_edges, "3d-1-3"

    a = [int(j) for j in minus]
    b = [int(j) for j in plus]
    c11 = edge_root(verts[a[0]], verts[b[0]], vals[a[0]], vals[b[0]])
    c12 = edge_root(verts[a[0]], verts[b[1]], vals[a[0]], vals[b[1]])
    c21 = edge_root(verts[a[1]], verts[b[0]], vals[a[1]], vals[b[0]])
    c22 = edge_root(verts[a[1]], verts[b[1]], vals[a[1]], vals[b[1]])
    # cyclic order: consecutive corners share a tet edge; split along the
    # diagonal from the first stored vertex in both prisms
    gamma = np.array([c11, c12, c22, c21])
    va1, va2 = verts[a[0]], verts[a[1]]
    vb1, vb2 = verts[b[0]], verts[b[1]]
    subs = [
        (np.array([va1, c11, c12, c22]), -1),
        (np.array([va1, c11, c22, c21]), -1),
        (np.array([va1, va2, c21, c22]), -1),
        (np.array([vb1, c11, c12, c22]), 1),
        (np.array([vb1, c11, c22, c21]), 1),
        (np.array([vb1, vb2, c12, c22]), 1),
    ]
    cut_edges = [
        (a[0], b[0], c11),
        (a[0], b[1], c12),
        (a[1], b[0], c21),
        (a[1], b[1], c22),
    ]
    return subs, gamma, cut_edges, "3d-2-2"


def _polygon_centroid(gamma: np.ndarray) -> np.ndarray:
    nv = gamma.shape[0]
    if nv == 2:
        return gamma.mean(axis=0)
    if nv == 3:
        return gamma.mean(axis=0)
    center = gamma.mean(axis=0)
    areas = np.empty(nv)
    cents = np.empty((nv, gamma.shape[1]))
    for k in range(nv):
        tri = np.array([center, gamma[k], gamma[(k + 1) % nv]])
        e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
        areas[k] = 0.5 * np.linalg.norm(np.cross(e1, e2))
        cents[k] = tri.mean(axis=0)
    total = areas.sum()
    if total == 0.0:
        return center
    return (areas[:, None] * cents).sum(axis=0) / total


def _interface_frame(verts, vals, dim):
    # gradient of the nodal interpolant points toward the plus side
    edges = verts[1:] - verts[0]
    grad = np.linalg.solve(edges, vals[1:] - vals[0])
    n = grad / np.linalg.norm(grad)
    if dim == 2:
        t = np.array([[n[1], -n[0]]])
        return n, t
    k = int(np.argmin(np.abs(n)))
    t1 = -n[k] * n
    t1[k] += 1.0
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return n, np.array([t1, t2])


@dataclass
class SurfacePatch:
    """Quadrature of the exact interface over a fictitious box.

    The box is centered at x_star, spanned by the tangent frame with
    parameter range [-h_T, h_T] per tangent axis; heights along the
    normal are found by root-finding on the level set.
    """

    cut: CutElement
    grid_n: int
    grid_params: np.ndarray  # (npar, dim-1) cell-corner parameters
    grid_heights: np.ndarray  # (npar,) normal offsets at the corners
    points: np.ndarray  # (nq, dim) quadrature nodes on the interface
    weights: np.ndarray  # (nq,)

    @property
    def area(self) -> float:
        return float(self.weights.sum())


_GAUSS2 = (np.array([-1.0, 1.0]) / np.sqrt(3.0), np.array([1.0, 1.0]))


def _heights_along_normal(levelset, base_points, normal, span, nscan=64, iters=60):
    """Root of s -> d(x + s n) nearest zero, for every base point.

    Scans [-span, span], picks the sign-change interval whose midpoint
    is nearest 0, then bisects.
    """
    npts = base_points.shape[0]
    s_grid = np.linspace(-span, span, nscan + 1)
    vals = np.empty((npts, nscan + 1))
    for k, s in enumerate(s_grid):
        vals[:, k] = levelset.value(base_points + s * normal)
    sign = np.where(vals >= 0.0, 1.0, -1.0)
    change = sign[:, :-1] * sign[:, 1:] < 0.0
    # treat exact zeros in the scan as found roots
    exact = vals == 0.0

    mids = 0.5 * (s_grid[:-1] + s_grid[1:])
    cost = np.where(change, np.abs(mids)[None, :], np.inf)
    best = np.argmin(cost, axis=1)
    found = np.isfinite(cost[np.arange(npts), best])
    if not np.all(found | exact.any(axis=1)):
        raise InterfaceResolutionError(
            "level set has no root along the normal within "
            f"[-{span:.3e}, {span:.3e}] of a patch point; interface not "
            "resolved by the mesh"
        )

    lo = s_grid[best].copy()
    hi = s_grid[best + 1].copy()
    flo = vals[np.arange(npts), best]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = levelset.value(base_points + mid[:, None] * normal)
        go_right = (fmid > 0.0) == (flo > 0.0)
        lo = np.where(go_right, mid, lo)
        flo = np.where(go_right, fmid, flo)
        hi = np.where(go_right, hi, mid)
    s = 0.5 * (lo + hi)

    if exact.any():
        rows, cols = np.nonzero(exact)
        for r, c in zip(rows, cols):
            if not found[r] or abs(s_grid[c]) < abs(s[r]):
                s[r] = s_grid[c]
    return s


def build_patch(levelset: LevelSet, cut: CutElement, grid_n: int = 16) -> SurfacePatch:
    """Quadrature of Gamma over the fictitious box of a cut element.

    Two-point Gauss per grid cell and parameter axis; the surface
    measure uses the analytic level-set normal.
    """
    dim = cut.dim
    span = cut.h_T
    ncell = grid_n
    edges_1d = np.linspace(-span, span, ncell + 1)
    half = span / ncell  # half cell width
    centers = 0.5 * (edges_1d[:-1] + edges_1d[1:])
    gpts_1d = (centers[:, None] + half * _GAUSS2[0][None, :]).ravel()
    gw_1d = np.tile(half * _GAUSS2[1], ncell)

    if dim == 2:
        params = gpts_1d[:, None]
        pweights = gw_1d
        corner_params = edges_1d[:, None]
    else:
        P1, P2 = np.meshgrid(gpts_1d, gpts_1d, indexing="ij")
        params = np.column_stack([P1.ravel(), P2.ravel()])
        W1, W2 = np.meshgrid(gw_1d, gw_1d, indexing="ij")
        pweights = (W1 * W2).ravel()
        C1, C2 = np.meshgrid(edges_1d, edges_1d, indexing="ij")
        corner_params = np.column_stack([C1.ravel(), C2.ravel()])

    base = cut.x_star[None, :] + params @ cut.t_frame
    heights = _heights_along_normal(levelset, base, cut.normal, span)
    points = base + heights[:, None] * cut.normal

    grad = levelset.gradient(points)
    gn = grad @ cut.normal
    gt = grad @ cut.t_frame.T  # (nq, dim-1)
    slope2 = (gt ** 2).sum(axis=1) / gn ** 2
    weights = pweights * np.sqrt(1.0 + slope2)

    corner_base = cut.x_star[None, :] + corner_params @ cut.t_frame
    corner_heights = _heights_along_normal(levelset, corner_base, cut.normal, span)

    return SurfacePatch(
        cut=cut,
        grid_n=grid_n,
        grid_params=corner_params,
        grid_heights=corner_heights,
        points=points,
        weights=weights,
    )


def avg_over_patch(patch: SurfacePatch, g) -> np.ndarray:
    """Average of a (vector valued) surface field over the patch."""
    vals = np.asarray(g(patch.points), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    avg = patch.weights @ vals / patch.area
    return avg


def closest_point(levelset: LevelSet, cut: CutElement, points: np.ndarray):
    """Map points near Gamma_h onto Gamma along the discrete normal.

    Returns (projected_points, offsets); the offset is the root of
    s -> d(x + s n_h) with smallest magnitude within [-h_T, h_T].
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    s = _heights_along_normal(levelset, points, cut.normal, cut.h_T)
    return points + s[:, None] * cut.normal, s

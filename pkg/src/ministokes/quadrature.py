"""Quadrature on simplices, cut elements and interface polygons.

Volume rules are conical products of Gauss-Legendre and Gauss-Jacobi
rules collapsed onto the simplex, so a rule of requested degree p is
exact for all polynomials of total degree p with strictly positive
weights, in any dimension and for any p.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

__all__ = [
    "QuadRule",
    "simplex_rule",
    "segment_rule",
    "map_rule",
    "map_rule_facet",
    "integrate_simplex",
    "integrate_cut",
    "integrate_interface_polygon",
    "polygon_quadrature",
    "cut_volume_quadrature",
    "DEFAULT_VOLUME_DEGREE",
    "DEFAULT_FACE_DEGREE",
    "DEFAULT_INTERFACE_DEGREE",
]


def DEFAULT_VOLUME_DEGREE(dim: int) -> int:
    return 2 * (dim + 1)


def DEFAULT_FACE_DEGREE(dim: int) -> int:
    return dim + 2


DEFAULT_INTERFACE_DEGREE = 4


@dataclass(frozen=True)
class QuadRule:
    """Quadrature rule on the reference simplex.

    Attributes
    ----------
    dim : int
    degree : int
        Largest total polynomial degree integrated exactly.
    barycentric : ndarray, shape (n, dim + 1)
    weights : ndarray, shape (n,)
        Sum to the reference simplex measure 1/dim!.
    """

    dim: int
    degree: int
    barycentric: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]


def _jacobi01(n: int, alpha: int):
    """Nodes/weights for int_0^1 f(t) (1-t)^alpha dt."""
    if alpha == 0:
        x, w = roots_legendre(n)
    else:
        x, w = roots_jacobi(n, alpha, 0.0)
    t = 0.5 * (x + 1.0)
    return t, w / 2.0 ** (alpha + 1)


@lru_cache(maxsize=None)
def simplex_rule(dim: int, degree: int) -> QuadRule:
    """Conical product rule of the requested exactness degree.

    Parameters
    ----------
    dim : int
        1, 2 or 3.
    degree : int
        Requested total degree of exactness, >= 0.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"unsupported simplex dimension {dim}")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    n = max(1, (degree + 2) // 2)  # Gauss: n points exact through 2n-1

    axes = [_jacobi01(n, alpha) for alpha in range(dim - 1, -1, -1)]
    # collapsed coordinates: x_k = t_k * prod_{j<k} (1 - t_j)
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    pts = np.empty((grids[0].size, dim))
    rem = np.ones_like(grids[0])
    for k in range(dim):
        pts[:, k] = (grids[k] * rem).ravel()
        rem = rem * (1.0 - grids[k])
    w = np.ones_like(grids[0])
    for k in range(dim):
        w = w * wgrids[k]
    weights = w.ravel().copy()

    bary = np.empty((pts.shape[0], dim + 1))
    bary[:, 1:] = pts
    bary[:, 0] = 1.0 - pts.sum(axis=1)
    return QuadRule(dim=dim, degree=degree, barycentric=bary, weights=weights)


def segment_rule(degree: int) -> QuadRule:
    """Gauss rule on the unit segment, barycentric (1-t, t)."""
    return simplex_rule(1, degree)


def map_rule(rule: QuadRule, vertices: np.ndarray):
    """Map a reference rule to a physical simplex.

    Returns (points, weights); weights sum to the simplex volume.
    """
    vertices = np.asarray(vertices, dtype=float)
    pts = rule.barycentric @ vertices
    edges = vertices[1:] - vertices[0]
    vol = abs(np.linalg.det(edges))  # = dim! * |T|
    return pts, rule.weights * vol


def map_rule_facet(rule: QuadRule, vertices: np.ndarray):
    """Map a reference rule to a simplex embedded in higher dimension.

    ``vertices`` has shape (rule.dim + 1, ambient_dim); weights sum to
    the facet measure.
    """
    vertices = np.asarray(vertices, dtype=float)
    pts = rule.barycentric @ vertices
    edges = vertices[1:] - vertices[0]
    gram = edges @ edges.T
    meas = np.sqrt(max(np.linalg.det(gram), 0.0))
    return pts, rule.weights * meas


def integrate_simplex(vertices: np.ndarray, f, degree: int) -> float:
    pts, w = map_rule(simplex_rule(vertices.shape[1], degree), vertices)
    return float(np.dot(w, np.asarray(f(pts), dtype=float)))


def cut_volume_quadrature(cut, degree: int, side: int | None = None):
    """Quadrature points over the sub-simplices of a cut element.

    Parameters
    ----------
    cut : CutElement
    degree : int
    side : int or None
        +1 or -1 restricts to that side; None takes both.

    Returns
    -------
    points : ndarray (n, dim)
    weights : ndarray (n,)
    sides : ndarray (n,) of +-1, the side label of each point.
    """
    rule = simplex_rule(cut.dim, degree)
    pts_list, w_list, s_list = [], [], []
    for verts, s in cut.sub_simplices:
        if side is not None and s != side:
            continue
        p, w = map_rule(rule, verts)
        pts_list.append(p)
        w_list.append(w)
        s_list.append(np.full(w.shape[0], s, dtype=np.int8))
    if not pts_list:
        return (
            np.empty((0, cut.dim)),
            np.empty(0),
            np.empty(0, dtype=np.int8),
        )
    return np.vstack(pts_list), np.concatenate(w_list), np.concatenate(s_list)


def integrate_cut(cut, side: int, f, degree: int | None = None) -> float:
    """Integrate ``f`` over one side of a cut element.

    ``f`` maps an (n, dim) point array to n values.  The default degree
    is 2*(dim+1), exact for every integrand assembled by this package.
    """
    if degree is None:
        degree = DEFAULT_VOLUME_DEGREE(cut.dim)
    pts, w, _ = cut_volume_quadrature(cut, degree, side=side)
    if w.size == 0:
        return 0.0
    return float(np.dot(w, np.asarray(f(pts), dtype=float)))


def polygon_quadrature(polygon: np.ndarray, degree: int = DEFAULT_INTERFACE_DEGREE):
    """Quadrature on a segment (2D) or convex planar polygon (3D).

    The polygon is triangulated as a fan around its vertex mean; the
    vertices must be cyclically ordered.  Returns (points, weights) with
    weights summing to the measure of the polygon.
    """
    polygon = np.asarray(polygon, dtype=float)
    ambient = polygon.shape[1]
    if ambient == 2:
        rule = segment_rule(degree)
        return map_rule_facet(rule, polygon)
    rule = simplex_rule(2, degree)
    nv = polygon.shape[0]
    if nv == 3:
        return map_rule_facet(rule, polygon)
    center = polygon.mean(axis=0)
    pts_list, w_list = [], []
    for k in range(nv):
        tri = np.array([center, polygon[k], polygon[(k + 1) % nv]])
        p, w = map_rule_facet(rule, tri)
        pts_list.append(p)
        w_list.append(w)
    return np.vstack(pts_list), np.concatenate(w_list)


def integrate_interface_polygon(cut, f, degree: int = DEFAULT_INTERFACE_DEGREE) -> float:
    """Integrate ``f`` over the discrete interface patch of a cut element."""
    pts, w = polygon_quadrature(cut.gamma_poly, degree)
    return float(np.dot(w, np.asarray(f(pts), dtype=float)))

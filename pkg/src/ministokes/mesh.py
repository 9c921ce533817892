"""Uniform Cartesian simplicial meshes of box domains.

A box is split into M subdivisions per axis.  In 2D every cell is cut
into two right triangles along the lower-left to upper-right diagonal,
in 3D every cube is cut into six tetrahedra sharing the main diagonal
(Kuhn decomposition).  All elements are congruent up to translation
within a fixed set of shape classes, which downstream assembly exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mesh",
    "FaceFrame",
    "MeshError",
    "build_cartesian",
    "face_frame",
    "simplex_volume",
    "simplex_inradius",
]


class MeshError(Exception):
    """Raised for invalid mesh construction parameters."""


# Kuhn tetrahedra of the unit cube: region x_{p0} >= x_{p1} >= x_{p2},
# vertices 0 -> e_{p0} -> e_{p0}+e_{p1} -> (1,1,1).  Odd permutations get
# vertices 1 and 2 swapped so every stored tet is positively oriented.
_KUHN_PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
_EVEN_PERMS = {(0, 1, 2), (1, 2, 0), (2, 0, 1)}


@dataclass(frozen=True)
class FaceFrame:
    """Oriented geometric data of a mesh face."""

    normal: np.ndarray
    diameter: float
    centroid: np.ndarray


@dataclass
class Mesh:
    """Simplicial mesh of a box domain.

    Attributes
    ----------
    dim : int
        Spatial dimension, 2 or 3.
    box : ndarray, shape (dim, 2)
        Axis-aligned bounding box [min, max] per axis.
    subdivisions : int
        Number of cells per axis.
    nodes : ndarray, shape (n_nodes, dim)
    elements : ndarray, shape (n_elements, dim + 1)
        Node indices, positively oriented.
    shape_class : ndarray, shape (n_elements,)
        Index of the translation class of each element (2 classes in 2D,
        6 in 3D).
    faces : ndarray, shape (n_faces, dim)
        Node indices of each codimension-one face, sorted ascending.
    face_elems : ndarray, shape (n_faces, 2)
        Adjacent element indices; -1 in the second slot on the boundary.
    face_normals : ndarray, shape (n_faces, dim)
        Unit normals oriented from ``face_elems[:, 0]`` to
        ``face_elems[:, 1]`` (outward on the boundary).
    face_diameters : ndarray, shape (n_faces,)
    boundary_nodes : ndarray of bool, shape (n_nodes,)
    cell_size : ndarray, shape (dim,)
        Edge lengths of the Cartesian cells.
    h : float
        Common element diameter.
    """

    dim: int
    box: np.ndarray
    subdivisions: int
    nodes: np.ndarray
    elements: np.ndarray
    shape_class: np.ndarray
    faces: np.ndarray
    face_elems: np.ndarray
    face_normals: np.ndarray
    face_diameters: np.ndarray
    boundary_nodes: np.ndarray
    cell_size: np.ndarray
    h: float
    element_faces: np.ndarray = field(repr=False, default=None)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def element_vertices(self, eid: int) -> np.ndarray:
        return self.nodes[self.elements[eid]]

    @property
    def volume(self) -> float:
        return float(np.prod(self.box[:, 1] - self.box[:, 0]))


def simplex_volume(vertices: np.ndarray) -> float:
    """Signed volume of a simplex given as (dim+1, dim) vertex array."""
    edges = vertices[1:] - vertices[0]
    dim = vertices.shape[1]
    return float(np.linalg.det(edges)) / _factorial(dim)


def simplex_inradius(vertices: np.ndarray) -> float:
    """Inradius of a simplex: dim * volume / (sum of face measures)."""
    dim = vertices.shape[1]
    vol = abs(simplex_volume(vertices))
    surf = 0.0
    for j in range(dim + 1):
        fverts = np.delete(vertices, j, axis=0)
        surf += _facet_measure(fverts)
    return dim * vol / surf


def _facet_measure(vertices: np.ndarray) -> float:
    edges = vertices[1:] - vertices[0]
    if edges.shape[0] == 1:
        return float(np.linalg.norm(edges[0]))
    gram = edges @ edges.T
    return float(np.sqrt(max(np.linalg.det(gram), 0.0))) / 2.0


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def build_cartesian(box, subdivisions: int) -> Mesh:
    """Build the uniform simplicial mesh of a box.

    Parameters
    ----------
    box : array_like, shape (dim, 2)
        Per-axis [min, max]; dim must be 2 or 3.
    subdivisions : int
        Cells per axis, must be >= 1.

    Returns
    -------
    Mesh
        Construction is deterministic: the same inputs yield bit-identical
        arrays.
    """
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or box.shape[0] not in (2, 3):
        raise MeshError("box must have shape (2,2) or (3,2)")
    if np.any(box[:, 1] <= box[:, 0]):
        raise MeshError("box must have positive extent on every axis")
    M = int(subdivisions)
    if M < 1:
        raise MeshError("subdivisions must be a positive integer")
    dim = box.shape[0]

    axes = [np.linspace(box[a, 0], box[a, 1], M + 1) for a in range(dim)]
    if dim == 2:
        X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
        nodes = np.column_stack([X.ravel(order="F"), Y.ravel(order="F")])
        elements, shape_class = _triangles(M)
    else:
        X, Y, Z = np.meshgrid(axes[0], axes[1], axes[2], indexing="ij")
        nodes = np.column_stack(
            [X.ravel(order="F"), Y.ravel(order="F"), Z.ravel(order="F")]
        )
        elements, shape_class = _tetrahedra(M)

    faces, face_elems, element_faces = _build_faces(elements, dim)
    face_normals, face_diameters = _face_geometry(nodes, elements, faces, face_elems)

    bnd = np.zeros(nodes.shape[0], dtype=bool)
    for a in range(dim):
        bnd |= np.isclose(nodes[:, a], box[a, 0]) | np.isclose(nodes[:, a], box[a, 1])

    cell_size = (box[:, 1] - box[:, 0]) / M
    h = float(np.linalg.norm(cell_size))

    return Mesh(
        dim=dim,
        box=box,
        subdivisions=M,
        nodes=nodes,
        elements=elements,
        shape_class=shape_class,
        faces=faces,
        face_elems=face_elems,
        face_normals=face_normals,
        face_diameters=face_diameters,
        boundary_nodes=bnd,
        cell_size=cell_size,
        h=h,
        element_faces=element_faces,
    )


def _triangles(M: int):
    i, j = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    i = i.ravel(order="F")
    j = j.ravel(order="F")
    n00 = i + j * (M + 1)
    n10 = n00 + 1
    n01 = n00 + (M + 1)
    n11 = n01 + 1
    ncell = M * M
    elements = np.empty((2 * ncell, 3), dtype=np.int64)
    elements[0::2] = np.column_stack([n00, n10, n11])
    elements[1::2] = np.column_stack([n00, n11, n01])
    shape_class = np.tile(np.array([0, 1]), ncell)
    return elements, shape_class


def _tetrahedra(M: int):
    i, j, k = np.meshgrid(np.arange(M), np.arange(M), np.arange(M), indexing="ij")
    i = i.ravel(order="F")
    j = j.ravel(order="F")
    k = k.ravel(order="F")
    stride = np.array([1, M + 1, (M + 1) ** 2], dtype=np.int64)
    base = i * stride[0] + j * stride[1] + k * stride[2]
    diag = base + stride.sum()
    ncell = M ** 3
    elements = np.empty((6 * ncell, 4), dtype=np.int64)
    for t, perm in enumerate(_KUHN_PERMS):
        v1 = base + stride[perm[0]]
        v2 = v1 + stride[perm[1]]
        if perm in _EVEN_PERMS:
            tet = np.column_stack([base, v1, v2, diag])
        else:
            tet = np.column_stack([base, v2, v1, diag])
        elements[t::6] = tet
    shape_class = np.tile(np.arange(6), ncell)
    return elements, shape_class


def _build_faces(elements: np.ndarray, dim: int):
    ne = elements.shape[0]
    nloc = dim + 1
    # face j of an element is opposite local vertex j
    local = [np.delete(np.arange(nloc), j) for j in range(nloc)]
    all_faces = np.concatenate([elements[:, idx] for idx in local], axis=0)
    all_faces = np.sort(all_faces, axis=1)
    owner = np.tile(np.arange(ne), nloc)

    faces, inverse = np.unique(all_faces, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    nf = faces.shape[0]
    face_elems = np.full((nf, 2), -1, dtype=np.int64)
    order = np.lexsort((owner, inverse))
    for idx in order:
        f = inverse[idx]
        e = owner[idx]
        if face_elems[f, 0] == -1:
            face_elems[f, 0] = e
        else:
            face_elems[f, 1] = e

    element_faces = np.empty((ne, nloc), dtype=np.int64)
    for j in range(nloc):
        element_faces[:, j] = inverse[j * ne : (j + 1) * ne]
    return faces, face_elems, element_faces


def _face_geometry(nodes, elements, faces, face_elems):
    fverts = nodes[faces]
    dim = nodes.shape[1]
    if dim == 2:
        edge = fverts[:, 1] - fverts[:, 0]
        diameters = np.linalg.norm(edge, axis=1)
        normals = np.column_stack([edge[:, 1], -edge[:, 0]])
    else:
        e1 = fverts[:, 1] - fverts[:, 0]
        e2 = fverts[:, 2] - fverts[:, 0]
        normals = np.cross(e1, e2)
        d01 = np.linalg.norm(e1, axis=1)
        d02 = np.linalg.norm(e2, axis=1)
        d12 = np.linalg.norm(fverts[:, 2] - fverts[:, 1], axis=1)
        diameters = np.maximum(np.maximum(d01, d02), d12)
    normals /= np.linalg.norm(normals, axis=1)[:, None]

    # orient from the first adjacent element toward the second
    fcent = fverts.mean(axis=1)
    ecent = nodes[elements[face_elems[:, 0]]].mean(axis=1)
    flip = np.einsum("ij,ij->i", normals, fcent - ecent) < 0.0
    normals[flip] *= -1.0
    return normals, diameters


def face_frame(mesh: Mesh, fid: int) -> FaceFrame:
    """Oriented unit normal, diameter and centroid of face ``fid``."""
    centroid = mesh.nodes[mesh.faces[fid]].mean(axis=0)
    return FaceFrame(
        normal=mesh.face_normals[fid].copy(),
        diameter=float(mesh.face_diameters[fid]),
        centroid=centroid,
    )


def p1_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the nodal hat functions, shape (n_elements, dim+1, dim).

    Computed once per mesh and cached on the instance.
    """
    cached = getattr(mesh, "_p1_grads", None)
    if cached is not None:
        return cached
    verts = mesh.nodes[mesh.elements]
    edges = verts[:, 1:] - verts[:, :1]
    inv = np.linalg.inv(edges)
    grads = np.empty((mesh.n_elements, mesh.dim + 1, mesh.dim))
    grads[:, 1:, :] = np.transpose(inv, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    mesh._p1_grads = grads
    return grads

"""Local velocity/pressure spaces on cut and uncut elements.

Every local field is stored as a pair of affine pieces (one per side of
the discrete interface) plus a bubble coefficient vector.  On uncut
elements the two pieces coincide.  On cut elements the nodal velocity
basis is enriched so that the discrete stress jump, velocity jump,
divergence jump and pressure gradient jump all vanish; each nodal
velocity function then carries a small piecewise pressure companion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interface import CutElement

__all__ = [
    "AuxiliaryJumpFunctions",
    "LocalBasis",
    "CorrectionField",
    "build_aux",
    "build_basis",
    "build_basis_rotated",
    "build_standard_basis",
    "build_correction",
    "bubble_factor",
]


def bubble_factor(dim: int) -> float:
    """Normalization making the bubble equal one at the barycenter."""
    return float((dim + 1) ** (dim + 1))


def _lam_gradients(vertices: np.ndarray) -> np.ndarray:
    dim = vertices.shape[1]
    edges = vertices[1:] - vertices[0]
    inv = np.linalg.inv(edges)
    grads = np.empty((dim + 1, dim))
    grads[1:] = inv.T
    grads[0] = -grads[1:].sum(axis=0)
    return grads


def _bary(vertices: np.ndarray, x: np.ndarray) -> np.ndarray:
    lamg = _lam_gradients(vertices)
    lam = lamg @ (np.asarray(x) - vertices[0])
    lam[0] += 1.0
    return lam


@dataclass
class AuxiliaryJumpFunctions:
    """Piecewise data driving the interface enrichment of one element.

    w is the distance to the extended interface plane on the plus side
    and zero on the minus side; z is -1 on the plus side and zero on the
    minus side.  Their nodal interpolants and the quantity
    theta = grad(I_h w) . n_h are what the basis formulas consume.
    """

    cut: CutElement
    w_nodal: np.ndarray
    z_nodal: np.ndarray
    ihw_grad: np.ndarray
    ihw_at_xstar: float
    ihz_grad: np.ndarray
    ihz_at_xstar: float
    theta: float


def build_aux(cut: CutElement) -> AuxiliaryJumpFunctions:
    n = cut.normal
    plus = cut.vertex_sides > 0
    w_nodal = np.where(plus, (cut.vertices - cut.x_star) @ n, 0.0)
    z_nodal = np.where(plus, -1.0, 0.0)

    lamg = _lam_gradients(cut.vertices)
    ihw_grad = w_nodal @ lamg
    ihz_grad = z_nodal @ lamg
    lam_star = _bary(cut.vertices, cut.x_star)
    ihw_at_xstar = float(w_nodal @ lam_star)
    ihz_at_xstar = float(z_nodal @ lam_star)

    theta = float(ihw_grad @ n)
    if not -1e-9 <= theta <= 1.0 + 1e-9:
        raise ValueError(
            f"theta = {theta} outside [0, 1]; element shapes are not the "
            "expected Cartesian simplices"
        )
    theta = min(max(theta, 0.0), 1.0)
    return AuxiliaryJumpFunctions(
        cut=cut,
        w_nodal=w_nodal,
        z_nodal=z_nodal,
        ihw_grad=ihw_grad,
        ihw_at_xstar=ihw_at_xstar,
        ihz_grad=ihz_grad,
        ihz_at_xstar=ihz_at_xstar,
        theta=theta,
    )


@dataclass
class LocalBasis:
    """Stacked affine-plus-bubble representation of the local basis.

    Array layout: dof k, side index s (0 minus, 1 plus).  Affine pieces
    are evaluated as value0 + grad @ (x - x_ref).  DoF order: velocity
    component-major nodal values, then nodal pressures, then bubbles.
    """

    dim: int
    vertices: np.ndarray
    x_ref: np.ndarray
    lam_grads: np.ndarray
    vel_grad: np.ndarray  # (ndof, 2, dim, dim)
    vel_val0: np.ndarray  # (ndof, 2, dim)
    bub: np.ndarray  # (ndof, dim)
    p_grad: np.ndarray  # (ndof, 2, dim)
    p_val0: np.ndarray  # (ndof, 2)

    @property
    def ndof(self) -> int:
        return self.vel_grad.shape[0]

    @property
    def n_vel(self) -> int:
        return self.dim * (self.dim + 1)

    @property
    def n_press(self) -> int:
        return self.dim + 1


def _alloc(dim: int, vertices, x_ref) -> LocalBasis:
    ndof = (dim + 1) ** 2 + dim
    return LocalBasis(
        dim=dim,
        vertices=np.asarray(vertices, dtype=float),
        x_ref=np.asarray(x_ref, dtype=float),
        lam_grads=_lam_gradients(np.asarray(vertices, dtype=float)),
        vel_grad=np.zeros((ndof, 2, dim, dim)),
        vel_val0=np.zeros((ndof, 2, dim)),
        bub=np.zeros((ndof, dim)),
        p_grad=np.zeros((ndof, 2, dim)),
        p_val0=np.zeros((ndof, 2)),
    )


def build_standard_basis(vertices: np.ndarray, x_ref=None) -> LocalBasis:
    """Conforming mini basis: hat velocities, bubbles, hat pressures."""
    vertices = np.asarray(vertices, dtype=float)
    dim = vertices.shape[1]
    if x_ref is None:
        x_ref = vertices.mean(axis=0)
    basis = _alloc(dim, vertices, x_ref)
    lamg = basis.lam_grads
    lam0 = _bary(vertices, basis.x_ref)

    for i in range(dim):
        for j in range(dim + 1):
            k = i * (dim + 1) + j
            basis.vel_grad[k, :, i, :] = lamg[j]
            basis.vel_val0[k, :, i] = lam0[j]
    for j in range(dim + 1):
        k = dim * (dim + 1) + j
        basis.p_grad[k, :, :] = lamg[j]
        basis.p_val0[k, :] = lam0[j]
    for i in range(dim):
        basis.bub[(dim + 1) ** 2 + i, i] = 1.0
    return basis


def build_basis(
    cut: CutElement,
    aux: AuxiliaryJumpFunctions,
    mu_plus: float,
    mu_minus: float,
) -> LocalBasis:
    """Interface-enriched basis of a cut element.

    For mu_plus == mu_minus all enrichment coefficients vanish exactly
    and the result coincides with the conforming basis.
    """
    dim = cut.dim
    n = cut.normal
    basis = build_standard_basis(cut.vertices, x_ref=cut.x_star)
    lamg = basis.lam_grads

    ratio = mu_minus / mu_plus - 1.0
    denom = 1.0 + ratio * aux.theta
    dmu = mu_minus - mu_plus

    # per-side data of w - I_h w and z - I_h z (gradients and values at
    # x_star; both w and z vanish on the plane through x_star)
    w_grad = np.array([-aux.ihw_grad, n - aux.ihw_grad])
    w_val0 = np.array([-aux.ihw_at_xstar, -aux.ihw_at_xstar])
    z_grad = np.array([-aux.ihz_grad, -aux.ihz_grad])
    z_val0 = np.array([-aux.ihz_at_xstar, -1.0 - aux.ihz_at_xstar])

    for i in range(dim):
        ndoti = n[i]
        for j in range(dim + 1):
            k = i * (dim + 1) + j
            gdotn = float(lamg[j] @ n)
            for t in cut.t_frame:
                # t^T sigma(ratio, lam_j e_i, 0) n / denom
                c = ratio * (t[i] * gdotn + float(lamg[j] @ t) * ndoti) / denom
                if c != 0.0:
                    basis.vel_grad[k] += c * np.einsum("i,sj->sij", t, w_grad)
                    basis.vel_val0[k] += c * np.outer(w_val0, t)
            pc = dmu * 2.0 * ndoti * gdotn  # n^T sigma(dmu, lam_j e_i, 0) n
            if pc != 0.0:
                basis.p_grad[k] += pc * z_grad
                basis.p_val0[k] += pc * z_val0
    return basis


def build_basis_rotated(
    cut: CutElement,
    aux: AuxiliaryJumpFunctions,
    mu_plus: float,
    mu_minus: float,
) -> LocalBasis:
    """Same basis assembled through interface-aligned coordinates.

    Independent of :func:`build_basis`: the element is rotated so the
    interface normal becomes the last axis, the closed-form expressions
    for tangential and normal velocity DoFs are applied there, and the
    result is rotated back and recombined into Cartesian nodal DoFs.
    """
    dim = cut.dim
    R = np.vstack([cut.t_frame, cut.normal[None, :]])  # rows: frame
    verts_loc = (cut.vertices - cut.x_star) @ R.T
    lamg_loc = _lam_gradients(verts_loc)
    lam0_loc = _bary(verts_loc, np.zeros(dim))

    ratio = mu_minus / mu_plus - 1.0
    denom = 1.0 + ratio * aux.theta
    dmu = mu_minus - mu_plus

    # k-field per side in local coordinates: ratio/denom * (w - I_h w);
    # w is the last local coordinate on the plus side, zero on minus
    ihw_grad_loc = R @ aux.ihw_grad
    q = ratio / denom
    k_grad = np.array([-q * ihw_grad_loc, -q * ihw_grad_loc])
    k_grad[1, dim - 1] += q
    k_val0 = np.array([-q * aux.ihw_at_xstar, -q * aux.ihw_at_xstar])
    z_grad_loc = np.array([-R @ aux.ihz_grad, -R @ aux.ihz_grad])
    z_val0 = np.array([-aux.ihz_at_xstar, -1.0 - aux.ihz_at_xstar])

    nloc = dim + 1
    # local-frame basis: slot (a, j) is unit value of frame component a
    # at node j; affine pieces in local coordinates
    vg = np.zeros((dim, nloc, 2, dim, dim))
    vv = np.zeros((dim, nloc, 2, dim))
    pg = np.zeros((dim, nloc, 2, dim))
    pv = np.zeros((dim, nloc, 2))
    for j in range(nloc):
        dlam = lamg_loc[j]
        dn = dlam[dim - 1]
        for a in range(dim - 1):
            # tangential slot: (lam + k dlam/dn) along axis a
            vg[a, j, :, a, :] = dlam[None, :] + dn * k_grad
            vv[a, j, :, a] = lam0_loc[j] + dn * k_val0
        a = dim - 1  # normal slot
        for b in range(dim - 1):
            vg[a, j, :, b, :] = dlam[b] * k_grad
            vv[a, j, :, b] = dlam[b] * k_val0
        vg[a, j, :, a, :] = dlam[None, :]
        vv[a, j, :, a] = lam0_loc[j]
        pg[a, j] = 2.0 * dmu * dn * z_grad_loc
        pv[a, j] = 2.0 * dmu * dn * z_val0

    basis = _alloc(dim, cut.vertices, cut.x_star)
    basis.lam_grads = _lam_gradients(cut.vertices)
    for i in range(dim):
        for j in range(nloc):
            k = i * (dim + 1) + j
            # Cartesian nodal DoF as frame combination, rotated back
            for a in range(dim):
                coeff = R[a, i]
                if coeff == 0.0:
                    continue
                basis.vel_grad[k] += coeff * np.einsum(
                    "sij,ia,jb->sab", vg[a, j], R, R
                )
                basis.vel_val0[k] += coeff * vv[a, j] @ R
                basis.p_grad[k] += coeff * pg[a, j] @ R
                basis.p_val0[k] += coeff * pv[a, j]
    lam0 = _bary(cut.vertices, cut.x_star)
    lamg = basis.lam_grads
    for j in range(nloc):
        k = dim * (dim + 1) + j
        basis.p_grad[k, :, :] = lamg[j]
        basis.p_val0[k, :] = lam0[j]
    for i in range(dim):
        basis.bub[(dim + 1) ** 2 + i, i] = 1.0
    return basis


@dataclass
class CorrectionField:
    """Piecewise affine lift carrying the averaged surface force.

    Same per-side layout as one basis column; vanishes at the vertices
    and outside its element.
    """

    dim: int
    vel_grad: np.ndarray  # (2, dim, dim)
    vel_val0: np.ndarray  # (2, dim)
    p_grad: np.ndarray  # (2, dim)
    p_val0: np.ndarray  # (2,)
    avg_g: np.ndarray


def build_correction(
    cut: CutElement,
    aux: AuxiliaryJumpFunctions,
    mu_plus: float,
    mu_minus: float,
    avg_g: np.ndarray,
) -> CorrectionField:
    dim = cut.dim
    n = cut.normal
    avg_g = np.asarray(avg_g, dtype=float)
    ratio = mu_minus / mu_plus - 1.0
    denom = 1.0 + ratio * aux.theta

    w_grad = np.array([-aux.ihw_grad, n - aux.ihw_grad])
    w_val0 = np.array([-aux.ihw_at_xstar, -aux.ihw_at_xstar])
    z_grad = np.array([-aux.ihz_grad, -aux.ihz_grad])
    z_val0 = np.array([-aux.ihz_at_xstar, -1.0 - aux.ihz_at_xstar])

    vel_grad = np.zeros((2, dim, dim))
    vel_val0 = np.zeros((2, dim))
    for t in cut.t_frame:
        c = float(t @ avg_g) / (mu_plus * denom)
        vel_grad += c * np.einsum("i,sj->sij", t, w_grad)
        vel_val0 += c * np.outer(w_val0, t)
    pc = float(n @ avg_g)
    return CorrectionField(
        dim=dim,
        vel_grad=vel_grad,
        vel_val0=vel_val0,
        p_grad=pc * z_grad,
        p_val0=pc * z_val0,
        avg_g=avg_g,
    )

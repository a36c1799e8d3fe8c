"""Assembly of the discrete transient-Stokes operators.

Builds the velocity mass and viscous matrices, the pressure-velocity
coupling, the symmetric pressure stabilization (continuous interior penalty
on gradient-normal jumps, or the global pressure-gradient variant), the
mean-value constraint row and time-dependent load vectors.  All volume
terms are vectorized over cells.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .fem import FeSpace, _tabulate, gauss_legendre_01, interpolate, triangle_quadrature

__all__ = [
    "ConfigurationError",
    "CellQuadrature",
    "StokesOperators",
    "DirichletBC",
    "DEFAULT_GAMMA",
    "cell_quadrature",
    "assemble_operators",
    "assemble_load",
    "apply_dirichlet",
    "load_norm",
]

DEFAULT_GAMMA = {"cip": 0.05, "bp": 0.01, "none": 0.0}

#: extra quadrature degree for loads and error norms (non-polynomial data)
LOAD_DEGREE_BUMP = 4


class ConfigurationError(ValueError):
    """Invalid discretization configuration."""


@dataclass(frozen=True)
class CellQuadrature:
    """Per-cell tabulation of one space at a volume quadrature rule."""

    space: FeSpace
    degree: int
    phys: np.ndarray    # (nc, nq, 2) physical quadrature points
    wdet: np.ndarray    # (nc, nq) weight times |det J|
    vals: np.ndarray    # (nq, nloc) reference basis values
    grads: np.ndarray   # (nc, nq, nloc, 2) physical basis gradients

    def field_values(self, coeffs: np.ndarray) -> np.ndarray:
        """Evaluate a discrete field at all quadrature points.

        Scalar spaces return (nc, nq); vector spaces (nc, nq, 2).
        """
        cd = self.space.cell_dofs
        if self.space.components == 1:
            return np.einsum("ci,qi->cq", coeffs[cd], self.vals)
        ns = self.space.num_scalar_dofs
        out = np.empty((len(cd), self.vals.shape[0], 2))
        for comp in range(2):
            out[:, :, comp] = np.einsum("ci,qi->cq", coeffs[comp * ns + cd], self.vals)
        return out

    def field_gradients(self, coeffs: np.ndarray) -> np.ndarray:
        """Gradients of a discrete field: (nc, nq, 2) scalar, (nc, nq, 2, 2) vector
        with axis order [component, derivative]."""
        cd = self.space.cell_dofs
        if self.space.components == 1:
            return np.einsum("ci,cqie->cqe", coeffs[cd], self.grads)
        ns = self.space.num_scalar_dofs
        out = np.empty((len(cd), self.vals.shape[0], 2, 2))
        for comp in range(2):
            out[:, :, comp, :] = np.einsum("ci,cqie->cqe", coeffs[comp * ns + cd], self.grads)
        return out


def cell_quadrature(space: FeSpace, degree: int) -> CellQuadrature:
    rule = triangle_quadrature(degree)
    vals, ref_grads = _tabulate(space.degree, rule.xy)
    J, jinv_t, det = space.jacobians()
    v0 = space.mesh.vertices[space.mesh.cells[:, 0]]
    phys = v0[:, None, :] + np.einsum("cde,qe->cqd", J, rule.xy)
    wdet = rule.weights[None, :] * det[:, None]
    grads = np.einsum("ced,qld->cqle", jinv_t, ref_grads)
    return CellQuadrature(space=space, degree=degree, phys=phys, wdet=wdet, vals=vals, grads=grads)


def _scatter(space: FeSpace, local: np.ndarray) -> sp.csr_matrix:
    """Accumulate per-cell local matrices (nc, nloc, nloc) into a csr matrix."""
    cd = space.cell_dofs
    nloc = cd.shape[1]
    rows = np.repeat(cd, nloc, axis=1).ravel()
    cols = np.tile(cd, (1, nloc)).ravel()
    n = space.num_scalar_dofs
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.eliminate_zeros()
    return mat


def _scalar_mass(space: FeSpace, degree: int) -> sp.csr_matrix:
    quad = cell_quadrature(space, degree)
    local = np.einsum("cq,qi,qj->cij", quad.wdet, quad.vals, quad.vals)
    return _scatter(space, local)


def _scalar_stiffness(space: FeSpace, degree: int) -> sp.csr_matrix:
    quad = cell_quadrature(space, degree)
    local = np.einsum("cq,cqie,cqje->cij", quad.wdet, quad.grads, quad.grads)
    return _scatter(space, local)


def _divergence_coupling(V: FeSpace, Q: FeSpace, degree: int) -> sp.csr_matrix:
    """B with (B p) . v = -(p, div v) for blocked vector velocity layout."""
    qu = cell_quadrature(V, degree)
    rule = triangle_quadrature(degree)
    pvals, _ = _tabulate(Q.degree, rule.xy)
    nsu, nsp = V.num_scalar_dofs, Q.num_scalar_dofs
    blocks = []
    for comp in range(2):
        local = -np.einsum("cq,cqie,qj->cij", qu.wdet, qu.grads[..., comp : comp + 1], pvals)
        nloc_u, nloc_p = V.cell_dofs.shape[1], Q.cell_dofs.shape[1]
        rows = np.repeat(V.cell_dofs, nloc_p, axis=1).ravel()
        cols = np.tile(Q.cell_dofs, (1, nloc_u)).ravel()
        blocks.append(sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nsu, nsp)))
    return sp.vstack(blocks).tocsr()


def _cip_stabilization(Q: FeSpace, nu: float, gamma: float) -> sp.csr_matrix:
    """Continuous interior penalty: gamma * sum_F (h_F^3 / nu) int_F [[grad p . n]] [[grad q . n]]."""
    mesh = Q.mesh
    facets = mesh.interior_facets
    nf = len(facets)
    kq = max(Q.degree, 1)
    s, w = gauss_legendre_01(kq)

    p0 = mesh.vertices[facets.endpoints[:, 0]]
    p1 = mesh.vertices[facets.endpoints[:, 1]]
    X = p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]  # (nf, kq, 2)

    J, jinv_t, _ = Q.jacobians()
    jinv = np.swapaxes(jinv_t, 1, 2)
    v0 = mesh.vertices[mesh.cells[:, 0]]
    nloc = Q.cell_dofs.shape[1]

    def normal_grad(cells: np.ndarray) -> np.ndarray:
        ref = np.einsum("fde,fqe->fqd", jinv[cells], X - v0[cells][:, None, :])
        _, g = _tabulate(Q.degree, ref.reshape(-1, 2))
        g = g.reshape(nf, kq, nloc, 2)
        gp = np.einsum("fed,fqld->fqle", jinv_t[cells], g)
        return np.einsum("fqle,fe->fql", gp, facets.normals)

    jump = np.concatenate([normal_grad(facets.left), -normal_grad(facets.right)], axis=2)
    coef = gamma * facets.lengths**3 / nu
    local = np.einsum("f,q,fqa,fqb->fab", coef * facets.lengths, w, jump, jump)

    dofs = np.hstack([Q.cell_dofs[facets.left], Q.cell_dofs[facets.right]])
    rows = np.repeat(dofs, 2 * nloc, axis=1).ravel()
    cols = np.tile(dofs, (1, 2 * nloc)).ravel()
    n = Q.num_scalar_dofs
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.eliminate_zeros()
    return mat


@dataclass(frozen=True)
class StokesOperators:
    """Assembled sparse operators of the stabilized Stokes discretization.

    ``B`` maps pressure coefficients to the velocity dual so that
    (B p) . v = b(p, v) = -(p, div v); the continuity equation reads
    B^T u - J p = 0 on the mean-zero pressure test space.
    """

    V: FeSpace
    Q: FeSpace
    nu: float
    stab: str
    gamma: float
    M: sp.csr_matrix          # velocity mass
    A: sp.csr_matrix          # nu * (grad u, grad v)
    B: sp.csr_matrix          # (num_u, num_p)
    J: sp.csr_matrix          # pressure stabilization, PSD
    Mq: sp.csr_matrix         # pressure mass
    mean_row: np.ndarray      # integrals of the pressure basis
    quad_u: CellQuadrature    # high-order rule on V for loads and errors
    quad_q: CellQuadrature    # matching rule on Q

    def interior_dofs(self) -> np.ndarray:
        mask = np.ones(self.V.num_dofs, dtype=bool)
        mask[self.V.boundary_dofs] = False
        return np.flatnonzero(mask)

    # semi-norms induced by the assembled forms
    def norm_H(self, u: np.ndarray) -> float:
        return float(np.sqrt(max(u @ (self.M @ u), 0.0)))

    def norm_V(self, u: np.ndarray) -> float:
        return float(np.sqrt(max(u @ (self.A @ u), 0.0)))

    def seminorm_jh(self, p: np.ndarray) -> float:
        return float(np.sqrt(max(p @ (self.J @ p), 0.0)))

    def norm_Q(self, p: np.ndarray) -> float:
        return float(np.sqrt(max(p @ (self.Mq @ p), 0.0) / self.nu))


def assemble_operators(
    V: FeSpace,
    Q: FeSpace,
    nu: float,
    stab: str = "cip",
    gamma: float | None = None,
) -> StokesOperators:
    """Assemble mass, viscous, coupling, stabilization and constraint operators."""
    if V.mesh is not Q.mesh:
        raise ConfigurationError("velocity and pressure spaces must share a mesh")
    if V.components != 2 or Q.components != 1:
        raise ConfigurationError("need a vector velocity space and a scalar pressure space")
    if nu <= 0:
        raise ConfigurationError("viscosity must be positive")
    if stab not in DEFAULT_GAMMA:
        raise ConfigurationError(f"unknown stabilization {stab!r}")
    if stab == "none" and not (V.degree == Q.degree + 1 and Q.degree >= 1):
        raise ConfigurationError(
            "unstabilized solves require an inf-sup stable Taylor-Hood pair "
            "(velocity degree = pressure degree + 1, pressure degree >= 1)"
        )
    if gamma is None:
        gamma = DEFAULT_GAMMA[stab]
    if gamma < 0:
        raise ConfigurationError("stabilization weight must be nonnegative")

    k = max(V.degree, Q.degree)
    deg_exact = 2 * k
    Ms = _scalar_mass(V, deg_exact)
    Ks = _scalar_stiffness(V, deg_exact)
    M = sp.block_diag([Ms, Ms]).tocsr()
    A = (nu * sp.block_diag([Ks, Ks])).tocsr()
    B = _divergence_coupling(V, Q, deg_exact)

    if stab == "cip":
        J = _cip_stabilization(Q, nu, gamma)
    elif stab == "bp":
        J = (gamma * Q.mesh.h**2 / nu) * _scalar_stiffness(Q, deg_exact)
    else:
        np_ = Q.num_scalar_dofs
        J = sp.csr_matrix((np_, np_))

    Mq = _scalar_mass(Q, deg_exact)
    mean_row = np.asarray(Mq.sum(axis=1)).ravel()

    deg_load = deg_exact + LOAD_DEGREE_BUMP
    return StokesOperators(
        V=V, Q=Q, nu=nu, stab=stab, gamma=gamma,
        M=M, A=A, B=B, J=J.tocsr(), Mq=Mq, mean_row=mean_row,
        quad_u=cell_quadrature(V, deg_load),
        quad_q=cell_quadrature(Q, deg_load),
    )


def _eval_forcing(quad: CellQuadrature, f: Callable, t: float) -> np.ndarray:
    """Evaluate a vector forcing at all quadrature points, shape (nc, nq, 2)."""
    x, y = quad.phys[..., 0], quad.phys[..., 1]
    vals = np.asarray(f(x, y, t), dtype=float)
    if vals.shape != x.shape + (2,):
        raise ValueError(f"forcing must return shape {x.shape + (2,)}, got {vals.shape}")
    return vals


def assemble_load(ops: StokesOperators, f: Callable, t: float) -> np.ndarray:
    """Load vector of entries (f(., t), phi_i) with the high-order rule.

    ``f(x, y, t)`` must be vectorized with a trailing component axis.
    """
    quad = ops.quad_u
    fv = _eval_forcing(quad, f, t)
    ns = ops.V.num_scalar_dofs
    out = np.zeros(2 * ns)
    for comp in range(2):
        local = np.einsum("cq,cq,qi->ci", quad.wdet, fv[..., comp], quad.vals)
        np.add.at(out, comp * ns + ops.V.cell_dofs, local)
    return out


def load_norm(ops: StokesOperators, f: Callable, t: float) -> float:
    """L2 norm of the forcing at time t by high-order quadrature."""
    quad = ops.quad_u
    fv = _eval_forcing(quad, f, t)
    return float(np.sqrt(np.einsum("cq,cqd->", quad.wdet, fv**2)))


@dataclass(frozen=True)
class DirichletBC:
    """Nodal Dirichlet data on the velocity boundary.

    ``values`` is a full-length velocity vector carrying the boundary nodal
    values (zero at interior dofs); ``flux`` is the net boundary flux of the
    interpolated datum, the compatibility residual of the incompressibility
    constraint (nonzero flux is absorbed by the pressure mean multiplier and
    reported rather than hidden).
    """

    boundary: np.ndarray
    interior: np.ndarray
    values: np.ndarray
    flux: float


def apply_dirichlet(ops: StokesOperators, g: Callable, t: float) -> DirichletBC:
    """Fix boundary velocity dofs to the nodal interpolation of g(., t)."""
    full = interpolate(ops.V, lambda x, y: g(x, y, t))
    boundary = ops.V.boundary_dofs
    values = np.zeros(ops.V.num_dofs)
    values[boundary] = full[boundary]
    ones_p = np.ones(ops.Q.num_scalar_dofs)
    flux = -float((ops.B @ ones_p) @ values)
    return DirichletBC(
        boundary=boundary,
        interior=ops.interior_dofs(),
        values=values,
        flux=flux,
    )

"""Stationary stabilized saddle-point solves and the Stokes Ritz projection."""
from __future__ import annotations

import threading
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import ConfigurationError, StokesOperators

__all__ = ["SaddleSolver", "solve_steady", "ritz_project"]


class SaddleSolver:
    """Direct factorization of the constrained block system.

    The system couples the velocity block K (SPD on interior dofs) with the
    divergence coupling, the negative stabilization block and one
    mean-value multiplier column:

        [ K_II   B_I   0 ] [u_I]   [rhs_u - K_IB u_B]
        [ B_I^T  -J    m ] [ p ] = [rhs_p - B_B^T u_B]
        [ 0      m^T   0 ] [lam]   [0]

    One factorization is reused across all right-hand sides; Dirichlet
    columns are moved to the right-hand side at solve time.
    """

    def __init__(self, ops: StokesOperators, K: sp.spmatrix):
        self.ops = ops
        self.interior = ops.interior_dofs()
        self.boundary = ops.V.boundary_dofs
        K = K.tocsr()
        self._K_ii = K[self.interior][:, self.interior]
        self._K_ib = K[self.interior][:, self.boundary]
        self._B_i = ops.B[self.interior]
        self._B_b = ops.B[self.boundary]
        m = sp.csr_matrix(ops.mean_row[:, None])
        system = sp.bmat(
            [
                [self._K_ii, self._B_i, None],
                [self._B_i.T, -ops.J, m],
                [None, m.T, None],
            ],
            format="csc",
        )
        try:
            self._lu = spla.splu(system)
        except RuntimeError as exc:
            raise ConfigurationError(
                "singular saddle-point factorization: check the mean-value "
                "constraint and stabilization settings"
            ) from exc
        self._system = system
        self._n_i = len(self.interior)
        self._n_p = ops.Q.num_scalar_dofs
        # per-thread solve record: one factorization may serve concurrent solves
        self._local = threading.local()

    def solve(
        self,
        rhs_u: np.ndarray,
        rhs_p: np.ndarray | None = None,
        boundary_values: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Solve for (u, p) given a full-length velocity rhs and boundary data.

        ``boundary_values`` is a full-length velocity vector whose boundary
        entries hold the Dirichlet data.  The returned pressure has zero mean.
        """
        ops = self.ops
        if rhs_p is None:
            rhs_p = np.zeros(self._n_p)
        b_u = rhs_u[self.interior]
        b_p = rhs_p.copy()
        if boundary_values is not None:
            u_b = boundary_values[self.boundary]
            b_u = b_u - self._K_ib @ u_b
            b_p = b_p - self._B_b.T @ u_b
        rhs = np.concatenate([b_u, b_p, [0.0]])
        sol = self._lu.solve(rhs)
        self._local.last = (rhs, sol)
        u = np.zeros(ops.V.num_dofs)
        u[self.interior] = sol[: self._n_i]
        if boundary_values is not None:
            u[self.boundary] = boundary_values[self.boundary]
        p = sol[self._n_i : self._n_i + self._n_p]
        p = p - ops.mean_row @ p  # unit-area domain: mean equals the integral
        return u, p

    def last_residual(self) -> float:
        """Relative residual of this thread's most recent solve under forward multiplication."""
        rhs, sol = self._local.last
        r = self._system @ sol - rhs
        denom = max(float(np.linalg.norm(rhs)), 1e-30)
        return float(np.linalg.norm(r)) / denom


def solve_steady(
    ops: StokesOperators,
    rhs_u: np.ndarray,
    rhs_p: np.ndarray | None = None,
    boundary_values: np.ndarray | None = None,
    K: sp.spmatrix | None = None,
    solver: SaddleSolver | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """One stationary solve with K = A unless another velocity block is given."""
    if solver is None:
        solver = SaddleSolver(ops, ops.A if K is None else K)
    return solver.solve(rhs_u, rhs_p, boundary_values)


def _ritz_rhs(
    ops: StokesOperators,
    grad_u: Callable,
    p: Callable | None,
) -> np.ndarray:
    """Assemble a(u, phi_i) + b(p, phi_i) by quadrature on the exact fields."""
    quad = ops.quad_u
    x, y = quad.phys[..., 0], quad.phys[..., 1]
    gu = np.asarray(grad_u(x, y), dtype=float)  # (..., 2, 2): [component, derivative]
    if gu.shape != x.shape + (2, 2):
        raise ValueError(f"grad_u must return shape {x.shape + (2, 2)}, got {gu.shape}")
    pv = None if p is None else np.asarray(p(x, y), dtype=float)
    ns = ops.V.num_scalar_dofs
    rhs = np.zeros(2 * ns)
    for comp in range(2):
        integrand = ops.nu * np.einsum("cqe,cqie->cqi", gu[..., comp, :], quad.grads)
        if pv is not None:
            integrand = integrand - pv[..., None] * quad.grads[..., comp]
        local = np.einsum("cq,cqi->ci", quad.wdet, integrand)
        np.add.at(rhs, comp * ns + ops.V.cell_dofs, local)
    return rhs


def ritz_project(
    ops: StokesOperators,
    u: Callable,
    grad_u: Callable,
    p: Callable | None = None,
    solver: SaddleSolver | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Stokes Ritz projection of an exact pair (u, p); p = None projects (u, 0).

    Solves a(S_u, v) + b(S_p, v) = a(u, v) + b(p, v) against all interior
    velocity test functions, with b(q, S_u) - j_h(S_p, q) = 0 on the pressure
    test space and the boundary dofs of S_u set to the nodal trace of u.
    The result is discretely divergence-free by construction.

    ``u(x, y) -> (..., 2)``, ``grad_u(x, y) -> (..., 2, 2)`` and
    ``p(x, y) -> (...)`` must be vectorized callables.
    """
    from .fem import interpolate

    rhs_u = _ritz_rhs(ops, grad_u, p)
    trace = interpolate(ops.V, u)
    boundary_values = np.zeros(ops.V.num_dofs)
    boundary_values[ops.V.boundary_dofs] = trace[ops.V.boundary_dofs]
    return solve_steady(ops, rhs_u, boundary_values=boundary_values, solver=solver)

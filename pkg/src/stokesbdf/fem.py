"""Continuous P_k Lagrange elements on triangles, quadrature and interpolation.

Degrees 1..3 are supported by default; 4..6 are available behind the
``high_order`` switch.  Global degrees of freedom are identified by exact
integer lattice keys, so C0 continuity across cell interfaces holds by
construction on the structured meshes of this package.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .mesh import Mesh

__all__ = [
    "FeSpace",
    "QuadratureRule",
    "make_space",
    "triangle_quadrature",
    "gauss_legendre_01",
    "eval_basis",
    "reference_basis",
    "interpolate",
]

MAX_DEFAULT_DEGREE = 3
MAX_DEGREE = 6


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature on the reference triangle {x, y >= 0, x + y <= 1}.

    ``points`` are barycentric coordinates (nq, 3) with respect to the
    vertices (0,0), (1,0), (0,1); weights sum to the reference area 1/2.
    """

    degree: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def xy(self) -> np.ndarray:
        """Reference coordinates (nq, 2)."""
        return self.points[:, 1:]


@lru_cache(maxsize=None)
def gauss_legendre_01(m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def triangle_quadrature(degree: int) -> QuadratureRule:
    """Rule exact for total degree ``degree``, built by collapsing a tensor
    Gauss rule through the Duffy map (x, y) = (s, t*(1-s))."""
    m = (degree + 3) // 2  # 2m-1 >= degree+1 covers the (1-s) Jacobian factor
    s, ws = gauss_legendre_01(m)
    t, wt = gauss_legendre_01(m)
    pts, wgt = [], []
    for i in range(m):
        for j in range(m):
            x = s[i]
            y = t[j] * (1.0 - s[i])
            pts.append((1.0 - x - y, x, y))
            wgt.append(ws[i] * wt[j] * (1.0 - s[i]))
    return QuadratureRule(degree=degree, points=np.array(pts), weights=np.array(wgt))


def _lattice_multi_indices(k: int) -> list[tuple[int, int]]:
    """Local node lattice (a, b), a + b <= k: vertices first, then edges, then interior."""
    verts = [(0, 0), (k, 0), (0, k)]
    edges = (
        [(a, 0) for a in range(1, k)]
        + [(k - a, a) for a in range(1, k)]
        + [(0, k - a) for a in range(1, k)]
    )
    interior = [(a, b) for a in range(1, k) for b in range(1, k - a)]
    return verts + edges + interior


@lru_cache(maxsize=None)
def reference_basis(k: int) -> tuple[np.ndarray, list[tuple[int, int]], np.ndarray]:
    """Monomial-coefficient matrix of the Lagrange basis of degree k.

    Returns (coeffs, nodes, exponents): shape function i is
    sum_m coeffs[m, i] * x^exps[m,0] * y^exps[m,1], and equals 1 at lattice
    node i, 0 at the others.
    """
    nodes = _lattice_multi_indices(k)
    exps = np.array([(a, b) for a in range(k + 1) for b in range(k + 1 - a)])
    pts = np.array([(a / k, b / k) for a, b in nodes])
    V = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
    coeffs = np.linalg.inv(V)  # columns = shape functions
    return coeffs, nodes, exps


def _tabulate(k: int, xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values (nq, nloc) and reference gradients (nq, nloc, 2) at points xy."""
    coeffs, _, exps = reference_basis(k)
    x, y = xy[:, 0][:, None], xy[:, 1][:, None]
    a, b = exps[:, 0][None, :], exps[:, 1][None, :]
    mono = x**a * y**b
    dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0) * y**b, 0.0)
    dy = np.where(b > 0, b * x**a * y ** np.maximum(b - 1, 0), 0.0)
    vals = mono @ coeffs
    grads = np.stack([dx @ coeffs, dy @ coeffs], axis=-1)
    return vals, grads


@dataclass(frozen=True)
class FeSpace:
    """Global C0 Lagrange space of degree k, scalar or 2-vector valued.

    Vector dofs are blocked by component: dof of component c at scalar node
    s is c * num_scalar_dofs + s.
    """

    mesh: Mesh
    degree: int
    components: int
    cell_dofs: np.ndarray      # (nc, nloc) scalar dof numbers
    dof_coords: np.ndarray     # (nscalar, 2)
    boundary_scalar_dofs: np.ndarray

    @property
    def num_scalar_dofs(self) -> int:
        return len(self.dof_coords)

    @property
    def num_dofs(self) -> int:
        return self.components * self.num_scalar_dofs

    @property
    def boundary_dofs(self) -> np.ndarray:
        """All constrained dof numbers (both components for vector spaces)."""
        b = self.boundary_scalar_dofs
        if self.components == 1:
            return b
        return np.concatenate([b + c * self.num_scalar_dofs for c in range(self.components)])

    def jacobians(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-cell affine map data: J (nc,2,2), inverse-transpose, |det|."""
        p = self.mesh.vertices[self.mesh.cells]
        J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        inv = np.empty_like(J)
        inv[:, 0, 0] = J[:, 1, 1]
        inv[:, 0, 1] = -J[:, 0, 1]
        inv[:, 1, 0] = -J[:, 1, 0]
        inv[:, 1, 1] = J[:, 0, 0]
        inv /= det[:, None, None]
        jinv_t = np.swapaxes(inv, 1, 2)
        return J, jinv_t, np.abs(det)


def make_space(mesh: Mesh, k: int, components: int = 1, high_order: bool = False) -> FeSpace:
    """Global Lagrange numbering on the integer lattice of step 1/(n*k)."""
    if components not in (1, 2):
        raise ValueError("components must be 1 or 2")
    limit = MAX_DEGREE if high_order else MAX_DEFAULT_DEGREE
    if not 1 <= k <= limit:
        raise ValueError(
            f"degree {k} unsupported (1..{MAX_DEFAULT_DEGREE} by default, "
            f"up to {MAX_DEGREE} with high_order=True)"
        )
    n = mesh.n
    _, local_nodes, _ = reference_basis(k)
    nk = n * k

    key_to_dof: dict[tuple[int, int], int] = {}
    coords: list[tuple[float, float]] = []
    cell_dofs = np.empty((mesh.num_cells, len(local_nodes)), dtype=np.int64)
    # integer vertex keys on the fine lattice
    vkeys = np.rint(mesh.vertices * nk).astype(np.int64)
    for c, tri in enumerate(mesh.cells):
        k0, k1, k2 = vkeys[tri[0]], vkeys[tri[1]], vkeys[tri[2]]
        for i, (a, b) in enumerate(local_nodes):
            p = k0 + (k1 - k0) * a // k + (k2 - k0) * b // k
            key = (int(p[0]), int(p[1]))
            dof = key_to_dof.get(key)
            if dof is None:
                dof = len(coords)
                key_to_dof[key] = dof
                coords.append((key[0] / nk, key[1] / nk))
            cell_dofs[c, i] = dof
    dof_coords = np.array(coords)
    keys = np.rint(dof_coords * nk).astype(np.int64)
    on_boundary = (
        (keys[:, 0] == 0) | (keys[:, 0] == nk) | (keys[:, 1] == 0) | (keys[:, 1] == nk)
    )
    return FeSpace(
        mesh=mesh,
        degree=k,
        components=components,
        cell_dofs=cell_dofs,
        dof_coords=dof_coords,
        boundary_scalar_dofs=np.flatnonzero(on_boundary),
    )


def eval_basis(space: FeSpace, cell: int, point: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shape-function values and physical gradients at one reference point.

    Returns (values (nloc,), gradients (nloc, 2)); values satisfy the
    partition of unity and the gradients are mapped with the
    inverse-transpose Jacobian of the affine cell map.
    """
    xy = np.asarray(point, dtype=float).reshape(1, 2)
    vals, grads = _tabulate(space.degree, xy)
    _, jinv_t, _ = space.jacobians()
    phys = grads[0] @ jinv_t[cell].T
    return vals[0], phys


def interpolate(space: FeSpace, f: Callable) -> np.ndarray:
    """Nodal interpolation: coefficients equal f at the Lagrange nodes.

    Scalar spaces take f(x, y) -> float; vector spaces take
    f(x, y) -> (2,) array (trailing component axis when vectorized).
    Vectorized callables receiving coordinate arrays are used directly;
    plain pointwise functions are evaluated node by node.
    """
    xs, ys = space.dof_coords[:, 0], space.dof_coords[:, 1]
    ns = space.num_scalar_dofs
    try:
        vals = np.asarray(f(xs, ys), dtype=float)
        if space.components == 1 and vals.shape != (ns,):
            raise ValueError
        if space.components == 2 and vals.shape != (ns, 2):
            raise ValueError
    except Exception:
        if space.components == 1:
            vals = np.array([float(f(x, y)) for x, y in zip(xs, ys)])
        else:
            vals = np.array([np.asarray(f(x, y), dtype=float) for x, y in zip(xs, ys)])
    if space.components == 1:
        return vals
    return np.concatenate([vals[:, 0], vals[:, 1]])

"""Structured triangulations of the unit square with interior-facet data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Mesh", "InteriorFacets", "unit_square_mesh"]


@dataclass(frozen=True)
class InteriorFacets:
    """Interior edges with their two incident cells.

    ``normals[f]`` is the unit normal pointing from ``left[f]`` into
    ``right[f]``; ``lengths[f]`` is the edge length h_F.
    """

    endpoints: np.ndarray  # (nf, 2) vertex indices
    left: np.ndarray       # (nf,) cell indices
    right: np.ndarray      # (nf,) cell indices
    normals: np.ndarray    # (nf, 2)
    lengths: np.ndarray    # (nf,)

    def __len__(self) -> int:
        return len(self.lengths)


@dataclass(frozen=True)
class Mesh:
    """Triangulation of the unit square: n x n squares split along one diagonal."""

    n: int
    vertices: np.ndarray              # (nv, 2)
    cells: np.ndarray                 # (nc, 3) counterclockwise vertex triples
    interior_facets: InteriorFacets
    boundary_vertices: np.ndarray     # sorted vertex indices on the boundary
    h: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h", float(np.sqrt(2.0) / self.n))

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def cell_areas(self) -> np.ndarray:
        p = self.vertices[self.cells]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def dump(self) -> str:
        """Plain-text vertex/cell listing for debugging."""
        lines = [f"mesh n={self.n} vertices={len(self.vertices)} cells={self.num_cells}"]
        for i, (x, y) in enumerate(self.vertices):
            lines.append(f"v {i} {x:.17g} {y:.17g}")
        for i, c in enumerate(self.cells):
            lines.append(f"c {i} {c[0]} {c[1]} {c[2]}")
        return "\n".join(lines) + "\n"


def unit_square_mesh(n: int) -> Mesh:
    """Uniform triangulation with (n+1)^2 vertices and 2*n^2 right triangles.

    Every square [i,i+1]x[j,j+1]/n is split along the diagonal from its
    lower-left to its upper-right corner, the same orientation everywhere so
    that refinements are reproducible.
    """
    if n < 2:
        raise ValueError(f"need at least 2 subdivisions per side, got {n}")
    idx = lambda i, j: j * (n + 1) + i
    xs = np.linspace(0.0, 1.0, n + 1)
    vertices = np.array([[xs[i], xs[j]] for j in range(n + 1) for i in range(n + 1)])

    cells = []
    for j in range(n):
        for i in range(n):
            v00, v10 = idx(i, j), idx(i + 1, j)
            v01, v11 = idx(i, j + 1), idx(i + 1, j + 1)
            cells.append((v00, v10, v11))  # lower-right triangle
            cells.append((v00, v11, v01))  # upper-left triangle
    cells = np.array(cells, dtype=np.int64)

    # edge -> incident cells census
    edge_cells: dict[tuple[int, int], list[int]] = {}
    for c, tri in enumerate(cells):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            edge_cells.setdefault(key, []).append(c)

    endpoints, left, right, normals, lengths = [], [], [], [], []
    centroids = vertices[cells].mean(axis=1)
    for (a, b), incident in sorted(edge_cells.items()):
        if len(incident) == 1:
            continue
        if len(incident) != 2:
            raise RuntimeError(f"edge {(a, b)} incident to {len(incident)} cells")
        cl, cr = incident
        t = vertices[b] - vertices[a]
        length = float(np.hypot(*t))
        nrm = np.array([t[1], -t[0]]) / length
        # orient from left cell into right cell
        if np.dot(nrm, centroids[cr] - centroids[cl]) < 0:
            cl, cr = cr, cl
        endpoints.append((a, b))
        left.append(cl)
        right.append(cr)
        normals.append(nrm)
        lengths.append(length)

    facets = InteriorFacets(
        endpoints=np.array(endpoints, dtype=np.int64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        normals=np.array(normals),
        lengths=np.array(lengths),
    )

    on_boundary = (
        np.isclose(vertices[:, 0], 0.0)
        | np.isclose(vertices[:, 0], 1.0)
        | np.isclose(vertices[:, 1], 0.0)
        | np.isclose(vertices[:, 1], 1.0)
    )
    return Mesh(
        n=n,
        vertices=vertices,
        cells=cells,
        interior_facets=facets,
        boundary_vertices=np.flatnonzero(on_boundary),
    )

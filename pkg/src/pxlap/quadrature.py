"""Cell quadrature helpers shared by norms, solver and the check harness.

Two rules are used in the package.  The norm module integrates with the
midpoint rule: field values at cell centers times cell volumes.  The solver
integrates gradient terms with the vertex rule: the gradient of the
multilinear interpolant evaluated at every cell corner, each corner carrying
vol / 2^n of the cell.  Ball-restricted integrals weight cut cells by the
contained volume fraction, estimated by subsampling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .grid import Ball, GridFunction

__all__ = ["CellGeometry", "midpoint_data", "ball_cell_weights", "lq_ball_norm"]


@dataclass
class CellGeometry:
    """Corner indexing and per-corner gradient stencils of a uniform lattice.

    corner_idx[c, k] is the flat node index of corner k of cell c.  For the
    multilinear interpolant on cell c, its gradient at corner k is
    grad_stencils[k] @ u[corner_idx[c]], an (n_axes,) vector.
    """

    dims: tuple
    spacing: np.ndarray
    corner_offsets: np.ndarray  # (2^n, n) in {0, 1}
    corner_idx: np.ndarray      # (ncells, 2^n)
    grad_stencils: np.ndarray   # (2^n, n, 2^n)
    cell_vol: float
    node_weights: np.ndarray    # (nnodes,) lumped vertex-rule weights

    @classmethod
    def build(cls, g: GridFunction) -> "CellGeometry":
        dims = g.dims
        n = len(dims)
        ncorner = 2**n
        offsets = np.array(list(itertools.product((0, 1), repeat=n)), dtype=int)

        cell_axes = [np.arange(d - 1) for d in dims]
        mesh = np.meshgrid(*cell_axes, indexing="ij")
        base = np.stack([m.ravel() for m in mesh], axis=1)  # (ncells, n)
        corner_idx = np.empty((base.shape[0], ncorner), dtype=np.int64)
        for k, off in enumerate(offsets):
            corner_idx[:, k] = np.ravel_multi_index((base + off).T, dims)

        # Gradient of the multilinear interpolant at corner k, axis a: the
        # one-sided difference along the cell edge through k in direction a.
        G = np.zeros((ncorner, n, ncorner))
        ofs_list = [tuple(o) for o in offsets]
        for k, off in enumerate(offsets):
            for a in range(n):
                hi = tuple(1 if i == a else o for i, o in enumerate(off))
                lo = tuple(0 if i == a else o for i, o in enumerate(off))
                G[k, a, ofs_list.index(hi)] += 1.0 / g.spacing[a]
                G[k, a, ofs_list.index(lo)] -= 1.0 / g.spacing[a]

        vol = float(np.prod(g.spacing))
        w = np.zeros(int(np.prod(dims)))
        np.add.at(w, corner_idx.ravel(), vol / ncorner)
        return cls(dims, g.spacing.copy(), offsets, corner_idx, G, vol, w)

    @property
    def n_axes(self) -> int:
        return len(self.dims)

    @property
    def n_cells(self) -> int:
        return self.corner_idx.shape[0]

    def corner_values(self, values: np.ndarray) -> np.ndarray:
        """Gather nodal values to (ncells, 2^n)."""
        return values.reshape(-1)[self.corner_idx]

    def corner_gradients(self, values: np.ndarray) -> np.ndarray:
        """Vertex-rule gradients, shape (ncells, 2^n corners, n_axes)."""
        uc = self.corner_values(values)
        return np.einsum("kaj,cj->cka", self.grad_stencils, uc)

    def center_gradients(self, values: np.ndarray) -> np.ndarray:
        """Cell-center gradients (mean of corner gradients), (ncells, n)."""
        return self.corner_gradients(values).mean(axis=1)


def midpoint_data(g: GridFunction) -> tuple:
    """(cell centers, cell volumes) for the midpoint rule over the grid box."""
    axes = [g.origin[a] + g.spacing[a] * (np.arange(g.dims[a] - 1) + 0.5)
            for a in range(g.n_axes)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    vols = np.full(centers.shape[0], float(np.prod(g.spacing)))
    return centers, vols


def cell_means(g: GridFunction) -> np.ndarray:
    """Mean of the corner values per cell (the multilinear center value)."""
    geo = CellGeometry.build(g)
    return geo.corner_values(g.values).mean(axis=1)


def ball_cell_weights(g: GridFunction, ball: Ball, subdiv: int = 8) -> np.ndarray:
    """Quadrature weights of each cell for integrals over cell-box  intersect ball.

    Cells fully inside keep their volume; cells fully outside get zero; cut
    cells are weighted by the inside fraction of a subdiv^n subsample.
    """
    centers, vols = midpoint_data(g)
    half = 0.5 * np.linalg.norm(g.spacing)
    d = np.linalg.norm(centers - ball.center, axis=1)
    w = np.where(d + half <= ball.radius, vols, 0.0)
    cut = (d - half < ball.radius) & (d + half > ball.radius)
    if np.any(cut):
        offs = [(np.arange(subdiv) + 0.5) / subdiv - 0.5 for _ in range(g.n_axes)]
        mesh = np.meshgrid(*offs, indexing="ij")
        rel = np.stack([m.ravel() for m in mesh], axis=1) * g.spacing
        for i in np.nonzero(cut)[0]:
            sub = centers[i] + rel
            frac = np.count_nonzero(ball.contains(sub)) / rel.shape[0]
            w[i] = vols[i] * frac
    return w


def lq_ball_norm(g: GridFunction, q: float, ball: Ball) -> float:
    """L^q norm of the grid function over the closed ball.

    Finite q integrates |u|^q with midpoint values on ball-weighted cells.
    q = inf returns the max of |u| over the nodes inside the ball, the only
    consistent discrete analogue of an essential sup.
    """
    if q == np.inf:
        mask = ball.contains(g.nodes())
        if not np.any(mask):
            raise ValueError(f"ball at {ball.center}, radius {ball.radius}: no grid nodes inside")
        return float(np.abs(g.values.reshape(-1)[mask]).max())
    if not q > 0:
        raise ValueError(f"integrability exponent must be positive, got {q}")
    w = ball_cell_weights(g, ball)
    vals = np.abs(cell_means(g))
    return float(np.sum(w * vals**q) ** (1.0 / q))

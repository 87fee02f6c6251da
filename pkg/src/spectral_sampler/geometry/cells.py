"""Coarse grid of cells that touch the target surface."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CellGrid:
    resolution: int
    dim: int
    active: np.ndarray  # boolean mask of shape (resolution,) * dim

    @property
    def cell_size(self) -> float:
        return 2.0 / self.resolution

    @property
    def indices(self) -> np.ndarray:
        return np.argwhere(self.active)

    @property
    def count(self) -> int:
        return int(self.active.sum())

    def cell_of(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, self.dim)
        idx = np.floor((pts + 1.0) / self.cell_size).astype(np.int64)
        return np.clip(idx, 0, self.resolution - 1)

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, self.dim)
        inside = np.all((pts >= -1.0) & (pts <= 1.0), axis=1)
        idx = self.cell_of(pts)
        return inside & self.active[tuple(idx.T)]

    def centers(self) -> np.ndarray:
        return -1.0 + (self.indices + 0.5) * self.cell_size

    def sample_uniform(self, count, rng) -> np.ndarray:
        """Uniform points over the union of active cells."""
        idx = self.indices
        pick = idx[rng.integers(0, len(idx), size=count)]
        return -1.0 + (pick + rng.random((count, self.dim))) * self.cell_size


def cell_centers(resolution: int, dim: int) -> np.ndarray:
    c = -1.0 + (np.arange(resolution) + 0.5) * (2.0 / resolution)
    mesh = np.meshgrid(*([c] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def active_cells(target, grid_res: int = 20) -> CellGrid:
    """Cells whose center lies within half a cell diagonal of the surface.

    Since |SDF| is 1-Lipschitz, any cell the surface passes through satisfies
    the test, so the result is a superset of the exactly intersected cells.
    """
    if not getattr(target, "has_surface", True):
        raise ValueError("target has no surface to select cells around")
    dim = target.dim
    edge = 2.0 / grid_res
    half_diag = 0.5 * np.sqrt(dim) * edge
    sdf = np.asarray(target.sdf(cell_centers(grid_res, dim)))
    mask = (np.abs(sdf) <= half_diag).reshape((grid_res,) * dim)
    return CellGrid(grid_res, dim, mask)

"""Zero-level-set extraction on a regular grid over [-1, 1]^dim."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage import measure


@dataclass(frozen=True)
class Contour:
    vertices: np.ndarray  # (n, 2)
    segments: np.ndarray  # (m, 2) vertex indices

    @property
    def empty(self) -> bool:
        return len(self.segments) == 0

    def to_csv(self) -> str:
        lines = ["x,y"] + [f"{x!r},{y!r}" for x, y in self.vertices.tolist()]
        return "\n".join(lines) + "\n"

    def to_svg(self, size: int = 512) -> str:
        def px(p):
            return f"{(p[0] + 1) * size / 2:.3f},{(1 - p[1]) * size / 2:.3f}"

        parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
                 f'viewBox="0 0 {size} {size}">',
                 f'<rect width="{size}" height="{size}" fill="white"/>']
        for a, b in self.segments.tolist():
            pa, pb = px(self.vertices[a]), px(self.vertices[b])
            parts.append(f'<polyline points="{pa} {pb}" fill="none" stroke="black" stroke-width="1"/>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


@dataclass(frozen=True)
class SurfaceMesh:
    vertices: np.ndarray  # (n, 3)
    faces: np.ndarray  # (m, 3)

    @property
    def empty(self) -> bool:
        return len(self.faces) == 0

    @property
    def area(self) -> float:
        if self.empty:
            return 0.0
        tri = self.vertices[self.faces]
        return float(0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1).sum())


def sample_grid(field, resolution: int, dim: int, chunk: int = 65536) -> np.ndarray:
    axis = np.linspace(-1.0, 1.0, resolution + 1)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.concatenate([np.asarray(field(pts[i:i + chunk]), dtype=np.float64)
                           for i in range(0, len(pts), chunk)])
    return vals.reshape((resolution + 1,) * dim)


def extract_levelset(field, resolution: int, dim: int):
    """Marching squares (dim 2) or marching cubes (dim 3) on ``resolution`` cells per axis.

    ``field`` maps an ``(n, dim)`` array to ``n`` values.  Returns an empty
    Contour/SurfaceMesh when the field never changes sign.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if dim not in (2, 3):
        raise ValueError("level sets are extracted in 2-d or 3-d only")
    grid = sample_grid(field, resolution, dim)
    h = 2.0 / resolution
    has_crossing = grid.min() < 0.0 < grid.max()

    if dim == 2:
        if not has_crossing:
            return Contour(np.zeros((0, 2)), np.zeros((0, 2), dtype=np.int64))
        verts, segs = [], []
        for line in measure.find_contours(grid, 0.0):
            pts = -1.0 + line * h
            closed = len(pts) > 2 and np.array_equal(line[0], line[-1])
            if closed:
                pts = pts[:-1]
            base = sum(len(v) for v in verts)
            n = len(pts)
            idx = np.arange(n)
            pairs = np.column_stack([idx, (idx + 1) % n]) if closed else np.column_stack([idx[:-1], idx[1:]])
            verts.append(pts)
            segs.append(pairs + base)
        v = np.concatenate(verts)
        s = np.concatenate(segs)
        keep = np.linalg.norm(v[s[:, 0]] - v[s[:, 1]], axis=1) > 0
        return Contour(v, s[keep])

    if not has_crossing:
        return SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    verts, faces, _, _ = measure.marching_cubes(grid, 0.0, spacing=(h, h, h))
    verts = verts - 1.0
    tri = verts[faces]
    area2 = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    return SurfaceMesh(verts, faces[area2 > 0])


def levelset_points(surface) -> np.ndarray:
    """Vertices used as the point set for Chamfer comparisons."""
    return surface.vertices

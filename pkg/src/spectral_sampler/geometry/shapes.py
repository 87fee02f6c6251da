"""Ground-truth signed distance targets (positive outside, negative inside)."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh, load_mesh, normalize_points


def _points(x, dim):
    x = np.asarray(x, dtype=np.float64)
    if dim == 1 and x.ndim <= 1:
        return x.reshape(-1, 1)
    pts = np.atleast_2d(x)
    if pts.shape[1] != dim:
        raise ValueError(f"expected {dim}-d points, got shape {x.shape}")
    return pts


class Target:
    """Common surface of every SDF target."""

    dim: int
    has_surface = True

    def sdf(self, points) -> np.ndarray:
        raise NotImplementedError

    def sample_surface(self, count, rng) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points):
        return self.sdf(points)


# -- 1D signals --------------------------------------------------------------

_INTERVALS = ((-0.7, -0.35), (-0.1, 0.05), (0.3, 0.8))


def _interval_sdf(x):
    d = np.full(x.shape, np.inf)
    inside = np.zeros(x.shape, dtype=bool)
    for a, b in _INTERVALS:
        d = np.minimum(d, np.minimum(np.abs(x - a), np.abs(x - b)))
        inside |= (x > a) & (x < b)
    return np.where(inside, -d, d)


SIGNALS = {
    "sin1": lambda x: 0.5 * np.sin(2 * np.pi * x),
    "sin4": lambda x: 0.5 * np.sin(2 * np.pi * 4 * x),
    "composite": lambda x: (0.4 * np.sin(2 * np.pi * x) + 0.25 * np.sin(2 * np.pi * 3 * x + 0.5)
                            + 0.1 * np.sin(2 * np.pi * 6 * x)),
    "intervals": _interval_sdf,
}


class Signal1D(Target):
    """Named scalar function on [-1, 1]; ``intervals`` is the SDF of three segments."""

    dim = 1
    has_surface = False

    def __init__(self, name: str):
        if name not in SIGNALS:
            raise ValueError(f"unknown 1-d signal {name!r}; choose from {sorted(SIGNALS)}")
        self.name = name
        self._fn = SIGNALS[name]

    def sdf(self, points):
        return self._fn(_points(points, 1)[:, 0])

    def __repr__(self):
        return f"Signal1D({self.name!r})"


# -- analytic shapes ---------------------------------------------------------


class Circle(Target):
    dim = 2

    def __init__(self, radius=0.5, center=(0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=np.float64)

    def sdf(self, points):
        return np.linalg.norm(_points(points, self.dim) - self.center, axis=1) - self.radius

    def sample_surface(self, count, rng):
        if self.dim == 2:
            th = rng.uniform(0, 2 * np.pi, count)
            d = np.column_stack([np.cos(th), np.sin(th)])
        else:
            d = rng.normal(size=(count, 3))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
        return self.center + self.radius * d

    def __repr__(self):
        return f"{type(self).__name__}({self.radius})"


class Sphere(Circle):
    dim = 3

    def __init__(self, radius=0.5, center=(0.0, 0.0, 0.0)):
        super().__init__(radius, center)


class Box(Target):
    def __init__(self, half_extents):
        self.half = np.asarray(half_extents, dtype=np.float64)
        self.dim = len(self.half)

    def sdf(self, points):
        q = np.abs(_points(points, self.dim)) - self.half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        return outside + np.minimum(q.max(axis=1), 0.0)

    def sample_surface(self, count, rng):
        pts = rng.uniform(-1, 1, size=(count, self.dim)) * self.half
        # project onto a face chosen in proportion to its area
        areas = np.array([np.prod(np.delete(self.half, k)) for k in range(self.dim)])
        axis = rng.choice(self.dim, size=count, p=areas / areas.sum())
        sign = rng.choice([-1.0, 1.0], size=count)
        pts[np.arange(count), axis] = sign * self.half[axis]
        return pts

    def __repr__(self):
        return f"Box({self.half.tolist()})"


class Polygon(Target):
    """Closed simple polygon given by its vertex loop (last edge implied)."""

    dim = 2

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least three 2-d vertices")
        self.vertices = v
        self.starts = v
        self.ends = np.roll(v, -1, axis=0)

    @property
    def edge_count(self):
        return len(self.vertices)

    def unsigned_distance(self, points, chunk=4096):
        pts = _points(points, 2)
        seg = self.ends - self.starts
        seg_len2 = np.einsum("ij,ij->i", seg, seg)
        out = np.empty(len(pts))
        for s in range(0, len(pts), chunk):
            p = pts[s:s + chunk, None, :] - self.starts[None]
            t = np.clip(np.einsum("nmk,mk->nm", p, seg) / seg_len2, 0.0, 1.0)
            d2 = np.sum((p - t[..., None] * seg) ** 2, axis=2)
            out[s:s + chunk] = np.sqrt(d2.min(axis=1))
        return out

    def contains(self, points, chunk=4096):
        """Even-odd crossing test."""
        pts = _points(points, 2)
        x0, y0 = self.starts[:, 0], self.starts[:, 1]
        x1, y1 = self.ends[:, 0], self.ends[:, 1]
        out = np.empty(len(pts), dtype=bool)
        for s in range(0, len(pts), chunk):
            px = pts[s:s + chunk, 0:1]
            py = pts[s:s + chunk, 1:2]
            straddle = (y0 > py) != (y1 > py)
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
            hits = straddle & (px < xcross)
            out[s:s + chunk] = hits.sum(axis=1) % 2 == 1
        return out

    def sdf(self, points):
        d = self.unsigned_distance(points)
        return np.where(self.contains(points), -d, d)

    def sample_surface(self, count, rng):
        seg = self.ends - self.starts
        lengths = np.linalg.norm(seg, axis=1)
        idx = rng.choice(len(seg), size=count, p=lengths / lengths.sum())
        t = rng.random(count)[:, None]
        return self.starts[idx] + t * seg[idx]

    def __repr__(self):
        return f"Polygon({len(self.vertices)} vertices)"


class MeshTarget(Target):
    dim = 3

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh

    @property
    def watertight(self):
        return self.mesh.watertight

    def sdf(self, points):
        return self.mesh.sdf(_points(points, 3))

    def sample_surface(self, count, rng):
        return self.mesh.sample_surface(count, rng)

    def __repr__(self):
        return f"MeshTarget({len(self.mesh.faces)} faces)"


def eval_sdf(target: Target, x):
    """Signed distance at one point (float) or an ``(n, dim)`` batch."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 0 or (arr.ndim == 1 and target.dim > 1 and arr.shape[0] == target.dim)
    if target.dim == 1 and arr.ndim == 1 and arr.shape[0] == 1:
        single = True
    out = target.sdf(arr)
    return float(out[0]) if single else out


def koch_snowflake(degree: int = 3) -> Polygon:
    """Koch snowflake polygon with ``3 * 4**degree`` edges, normalized to span [-1, 1]."""
    if not 0 <= degree <= 3:
        raise ValueError("degree must be in 0..3")
    angles = np.pi / 2 - np.arange(3) * 2 * np.pi / 3
    pts = np.column_stack([np.cos(angles), np.sin(angles)])  # clockwise triangle
    rot = np.array([[0.5, np.sqrt(3) / 2], [-np.sqrt(3) / 2, 0.5]])  # rotate by -60 deg
    for _ in range(degree):
        nxt = []
        for p, q in zip(pts, np.roll(pts, -1, axis=0)):
            d = (q - p) / 3.0
            a, b = p + d, p + 2 * d
            # with clockwise orientation the outward bump is a +60 deg turn
            peak = a + rot.T @ d
            nxt += [p, a, peak, b]
        pts = np.array(nxt)
    return Polygon(normalize_polygon(pts))


def normalize_polygon(v):
    return normalize_points(np.asarray(v, dtype=np.float64))


def parse_target(text: str) -> Target:
    """Parse ``circle:0.5``, ``sphere:0.5``, ``box:0.4,0.3``, ``koch:3``, ``mesh:path.obj``, ``signal:sin4``."""
    kind, _, arg = text.partition(":")
    if kind == "circle":
        return Circle(float(arg or 0.5))
    if kind == "sphere":
        return Sphere(float(arg or 0.5))
    if kind == "box":
        return Box([float(v) for v in arg.split(",")])
    if kind == "koch":
        return koch_snowflake(int(arg or 3))
    if kind == "mesh":
        return MeshTarget(load_mesh(arg))
    if kind == "signal":
        return Signal1D(arg or "sin4")
    raise ValueError(f"unknown target spec {text!r}")

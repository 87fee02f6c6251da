"""Training and validation point sets derived from a cut-off frequency."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry.cells import CellGrid, active_cells

DEFAULT_MAX_POINTS = 5_000_000
OFFSET_VARIANCES = (0.0025, 0.00025)


class PlanTooLargeError(MemoryError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"sampling plan would hold {count} points (budget {budget})")
        self.count = count
        self.budget = budget


class RegionSaturatedError(RuntimeError):
    pass


@dataclass
class SamplingPlan:
    cutoff: float
    dim: int
    rate: float
    spacing: float
    restriction: str
    points: np.ndarray
    labels: np.ndarray
    seed: int = 0
    cells: CellGrid | None = None
    target: object = field(default=None, repr=False)

    def __len__(self):
        return len(self.points)

    def in_region(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, self.dim)
        if self.cells is not None:
            return self.cells.contains(pts)
        return np.all((pts >= -1.0) & (pts <= 1.0), axis=1)

    def header(self) -> dict:
        return {"F_c": self.cutoff, "dims": self.dim, "rate": self.rate, "spacing": self.spacing,
                "restriction": self.restriction, "seed": self.seed, "count": len(self),
                "grid_res": self.cells.resolution if self.cells is not None else None}

    def to_csv(self) -> str:
        return points_to_csv(self.points, self.labels)


def points_to_csv(points, labels) -> str:
    points = np.asarray(points).reshape(len(labels), -1)
    names = ["x", "y", "z"][: points.shape[1]]
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(names + ["sdf"])
    for p, s in zip(points.tolist(), np.asarray(labels).tolist()):
        w.writerow([repr(v) for v in p] + [repr(s)])
    return buf.getvalue()


def points_from_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][-1] != "sdf":
        raise ValueError("expected a header ending in 'sdf'")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
    dim = len(rows[0]) - 1
    if data.size == 0:
        return np.zeros((0, dim)), np.zeros(0)
    return data[:, :-1], data[:, -1]


def save_plan(plan: SamplingPlan, csv_path, json_path) -> None:
    with open(csv_path, "w") as fh:
        fh.write(plan.to_csv())
    with open(json_path, "w") as fh:
        json.dump(plan.header(), fh, indent=2)


def load_plan(csv_path, json_path) -> SamplingPlan:
    with open(json_path) as fh:
        head = json.load(fh)
    with open(csv_path) as fh:
        pts, labels = points_from_csv(fh.read())
    return SamplingPlan(head["F_c"], head["dims"], head["rate"], head["spacing"],
                        head["restriction"], pts, labels, head.get("seed", 0))


def grid_axis(rate: float) -> np.ndarray:
    """Coordinates ``-1, -1 + 1/rate, ...`` up to and including 1 when it lands on the grid."""
    count = int(math.floor(2.0 * rate * (1.0 + 1e-12))) + 1
    return -1.0 + np.arange(count) / rate


def build_plan(cutoff: float, dim: int, target, restriction: str = "active-cells", seed: int = 0,
               spacing: float | None = None, grid_res: int = 20,
               max_points: int = DEFAULT_MAX_POINTS) -> SamplingPlan:
    """Uniform grid at ``2 * cutoff`` samples per unit coordinate, optionally kept near the surface."""
    if not cutoff > 0:
        raise ValueError("cut-off frequency must be positive")
    if restriction not in ("whole-domain", "active-cells"):
        raise ValueError(f"unknown restriction {restriction!r}")
    rate = 2.0 * cutoff if spacing is None else 1.0 / spacing
    axis = grid_axis(rate)
    total = len(axis) ** dim

    cells = None
    if restriction == "active-cells":
        cells = active_cells(target, grid_res)
    elif total > max_points:
        raise PlanTooLargeError(total, max_points)

    if dim == 1:
        slabs = [axis[:, None]]
    else:
        rest = np.meshgrid(*([axis] * (dim - 1)), indexing="ij")
        rest = np.stack([r.ravel() for r in rest], axis=1)
        slabs = (np.column_stack([np.full(len(rest), x0), rest]) for x0 in axis)

    kept, count = [], 0
    for slab in slabs:
        if cells is not None:
            slab = slab[cells.contains(slab)]
        count += len(slab)
        if count > max_points:
            raise PlanTooLargeError(count, max_points)
        kept.append(slab)
    pts = np.concatenate(kept) if kept else np.zeros((0, dim))
    labels = np.asarray(target.sdf(pts), dtype=np.float64) if len(pts) else np.zeros(0)
    return SamplingPlan(cutoff, dim, rate, 1.0 / rate, restriction, pts, labels, seed, cells, target)


def offset_samples(target, count: int, variances=OFFSET_VARIANCES, seed: int = 0):
    """Surface points perturbed by isotropic Gaussian offsets, half per variance tier."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    surf = target.sample_surface(count, rng)
    noise = rng.standard_normal((count, target.dim))
    sigma = np.empty(count)
    half = count // 2
    sigma[:half] = math.sqrt(variances[0])
    sigma[half:] = math.sqrt(variances[1])
    pts = surf + sigma[:, None] * noise
    return pts, np.asarray(target.sdf(pts), dtype=np.float64)


def lattice_distance(pts: np.ndarray, spacing: float) -> np.ndarray:
    """Distance from each point to the nearest node of the infinite grid anchored at -1."""
    rel = (pts + 1.0) / spacing
    return np.linalg.norm((rel - np.round(rel)) * spacing, axis=1)


def validation_points(plan: SamplingPlan, count: int, seed: int = 0, target=None,
                      exclusion: float | None = None, max_rounds: int = 200):
    """Uniform points in the plan's region, kept at least ``exclusion`` away from the grid.

    ``exclusion`` defaults to half the spacing in 2-d/3-d and a quarter of it in
    1-d, where every point lies within half a spacing of some grid node.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    target = target if target is not None else plan.target
    if target is None:
        raise ValueError("a target is needed to label validation points")
    if exclusion is None:
        exclusion = plan.spacing / (4.0 if plan.dim == 1 else 2.0)
    rng = np.random.default_rng(seed)
    got, have = [], 0
    for _ in range(max_rounds):
        need = count - have
        batch = max(2 * need, 1024)
        if plan.cells is not None:
            cand = plan.cells.sample_uniform(batch, rng)
        else:
            cand = rng.uniform(-1.0, 1.0, size=(batch, plan.dim))
        cand = cand[lattice_distance(cand, plan.spacing) >= exclusion]
        got.append(cand[:need])
        have += len(got[-1])
        if have >= count:
            pts = np.concatenate(got)
            return pts, np.asarray(target.sdf(pts), dtype=np.float64)
    raise RegionSaturatedError(f"only {have} of {count} validation points found off the grid")


def fourier_reconstruct(samples, x, start: float = -1.0, period: float = 2.0) -> np.ndarray:
    """Trigonometric interpolant of uniform samples ``start + j * period / N`` evaluated at ``x``.

    Exact for periodic signals whose frequencies lie strictly below half the
    sampling rate; above that the components alias onto lower bins.
    """
    y = np.asarray(samples, dtype=np.float64)
    n = y.size
    coef = np.fft.rfft(y) / n
    k = np.arange(coef.size)
    weight = np.full(coef.size, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0  # the Nyquist bin has no conjugate partner
    phase = 2j * np.pi * np.outer(np.asarray(x, dtype=np.float64) - start, k) / period
    return np.real(np.exp(phase) @ (weight * coef))

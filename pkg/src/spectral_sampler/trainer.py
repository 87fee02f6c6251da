"""SDF fitting loop, metrics, sampling-rate sweeps and level-set extraction."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry.chamfer import chamfer_distance
from .geometry.marching import extract_levelset
from .nn_core import AdamState, Mlp, NetworkConfig, adam_step, evaluate_batched, init_network, loss_and_grad
from .sampling import SamplingPlan, build_plan, validation_points
from .spectrum import DegenerateSignalError, NoCutoffError, probe_trained_network

log = logging.getLogger(__name__)


class TrainingDivergedError(FloatingPointError):
    def __init__(self, iteration: int):
        super().__init__(f"non-finite loss at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 5000
    batch_size: int = 4096
    lr: float = 1e-4
    decay_at: float = 0.9
    decay_factor: float = 0.1
    seed: int = 0
    spectrum_period: int = 0
    spectrum_points: int = 8192

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.lr > 0:
            raise ValueError("lr must be positive")

    @classmethod
    def full_scale(cls, **kw) -> "TrainConfig":
        return cls(**{"iterations": 30_000, "batch_size": 100_000, **kw})

    def lr_at(self, it: int) -> float:
        return self.lr * self.decay_factor if it >= self.decay_at * self.iterations else self.lr


@dataclass
class TrainRun:
    mlp: Mlp
    loss_history: list[float]
    lr_history: list[float]
    cutoff_trajectory: list[tuple[int, float]]
    config: NetworkConfig
    train_config: TrainConfig

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1] if self.loss_history else math.nan

    def to_dict(self) -> dict:
        return {
            "network": self.config.to_dict(),
            "train": asdict(self.train_config),
            "loss_history": self.loss_history,
            "lr_history": self.lr_history,
            "cutoff_trajectory": [list(p) for p in self.cutoff_trajectory],
        }

    def save(self, run_path, checkpoint_path) -> None:
        with open(run_path, "w") as fh:
            json.dump(self.to_dict(), fh)
        with open(checkpoint_path, "w") as fh:
            fh.write(self.mlp.to_json())


@dataclass(frozen=True)
class Metrics:
    sdf_error: float
    rmse: float
    chamfer: float | None = None

    def to_dict(self) -> dict:
        return {"sdf_error": self.sdf_error, "rmse": self.rmse, "chamfer": self.chamfer}


def _batches(n: int, size: int, rng):
    """Endless stream of index batches; each epoch is a fresh permutation."""
    while True:
        perm = rng.permutation(n)
        for s in range(0, n, size):
            yield perm[s:s + size]


def _probe_cutoff(mlp, points):
    try:
        return probe_trained_network(mlp, points).cutoff
    except (DegenerateSignalError, NoCutoffError) as exc:
        log.warning("cut-off probe failed: %s", exc)
        return math.nan


def train(config: NetworkConfig, tcfg: TrainConfig, plan: SamplingPlan, init: Mlp | None = None) -> TrainRun:
    """Fit the network to the plan's labels with mean-L1 loss and Adam."""
    if len(plan) == 0:
        raise ValueError("sampling plan is empty")
    if plan.dim != config.input_dim:
        raise ValueError(f"plan is {plan.dim}-d but the network takes {config.input_dim}-d input")
    mlp = init.copy() if init is not None else init_network(config)
    state = AdamState.for_network(mlp)
    rng = np.random.default_rng(tcfg.seed)
    batches = _batches(len(plan), tcfg.batch_size, rng)
    pts, labels = plan.points, plan.labels

    losses, lrs, traj = [], [], []
    hook = tcfg.spectrum_period > 0
    for it in range(tcfg.iterations):
        if hook and it % tcfg.spectrum_period == 0:
            traj.append((it, _probe_cutoff(mlp, tcfg.spectrum_points)))
        idx = next(batches)
        loss, grads = loss_and_grad(mlp, pts[idx], labels[idx])
        if not math.isfinite(loss):
            raise TrainingDivergedError(it)
        lr = tcfg.lr_at(it)
        mlp, state = adam_step(mlp, state, grads, lr)
        losses.append(loss)
        lrs.append(lr)
    if hook:
        traj.append((tcfg.iterations, _probe_cutoff(mlp, tcfg.spectrum_points)))
    return TrainRun(mlp, losses, lrs, traj, config, tcfg)


def evaluate(run, target, validation) -> Metrics:
    """Mean absolute and RMS error of the network against labelled validation points.

    ``run`` may be a TrainRun, an Mlp or any callable field.  ``target`` is kept
    for interface symmetry; labels are taken from ``validation``.
    """
    pts, labels = validation
    labels = np.asarray(labels, dtype=np.float64)
    if len(labels) == 0:
        raise ValueError("validation set is empty")
    pred = _field(run)(np.asarray(pts, dtype=np.float64))
    err = np.abs(pred - labels)
    scale = float(err.max())
    if scale == 0.0 or not np.isfinite(scale):
        return Metrics(float(np.mean(err)), float(np.sqrt(np.mean(err * err))))
    # scale before squaring so tiny errors do not underflow
    return Metrics(float(np.mean(err)), scale * float(np.sqrt(np.mean((err / scale) ** 2))))


def _field(model):
    if isinstance(model, TrainRun):
        model = model.mlp
    if isinstance(model, Mlp):
        return lambda p, m=model: evaluate_batched(m, p)
    return model


def training_error(run: TrainRun, plan: SamplingPlan) -> float:
    return float(np.mean(np.abs(evaluate_batched(run.mlp, plan.points) - plan.labels)))


@dataclass(frozen=True)
class SweepPoint:
    rate: float
    sdf_error: float
    rmse: float
    train_error: float
    samples: int
    failure: str | None = None
    run: TrainRun | None = field(default=None, compare=False, repr=False)


def curve_to_csv(curve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["rate", "sdf_error", "rmse", "train_error", "samples"])
    for p in curve:
        w.writerow([repr(p.rate), repr(p.sdf_error), repr(p.rmse), repr(p.train_error), p.samples])
    return buf.getvalue()


def sweep_rates(config: NetworkConfig, tcfg: TrainConfig, target, rates, restriction: str | None = None,
                validation_count: int = 20_000, validation_seed: int = 1, jobs: int = 1,
                grid_res: int = 20) -> list[SweepPoint]:
    """Train and evaluate once per per-axis sampling rate on a shared validation set."""
    rates = [float(r) for r in rates]
    if not rates or min(rates) <= 0:
        raise ValueError("rates must be a non-empty list of positive numbers")
    if restriction is None:
        restriction = "active-cells" if getattr(target, "has_surface", True) else "whole-domain"
    dim = config.input_dim
    densest = build_plan(max(rates) / 2.0, dim, target, restriction, grid_res=grid_res)
    validation = validation_points(densest, validation_count, validation_seed)

    def one(rate):
        try:
            plan = build_plan(rate / 2.0, dim, target, restriction, grid_res=grid_res)
            run = train(config, tcfg, plan)
            m = evaluate(run, target, validation)
            return SweepPoint(rate, m.sdf_error, m.rmse, training_error(run, plan), len(plan), run=run)
        except Exception as exc:  # keep sweeping; the failure is reported per rate
            log.error("rate %s failed: %s", rate, exc)
            return SweepPoint(rate, math.nan, math.nan, math.nan, 0, f"{type(exc).__name__}: {exc}")

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(one, rates))
    return [one(r) for r in rates]


def surface_chamfer(field, target, resolution: int, surface_samples: int = 20_000, seed: int = 0):
    """Extract the zero level set of ``field`` and compare it with the true surface.

    Returns ``(surface, chamfer)``; chamfer is None when nothing was extracted.
    """
    surface = extract_levelset(_field(field), resolution, target.dim)
    if surface.empty:
        return surface, None
    gt = target.sample_surface(surface_samples, np.random.default_rng(seed))
    return surface, chamfer_distance(surface.vertices, gt)


def fit_and_extract(config: NetworkConfig, tcfg: TrainConfig, target, plan: SamplingPlan,
                    resolution: int = 128, validation=None, surface_samples: int = 20_000):
    if config.input_dim not in (2, 3):
        raise ValueError("surface extraction needs a 2-d or 3-d network")
    run = train(config, tcfg, plan)
    if validation is None:
        validation = validation_points(plan, 10_000, seed=tcfg.seed + 1)
    m = evaluate(run, target, validation)
    surface, cd = surface_chamfer(run, target, resolution, surface_samples, seed=tcfg.seed)
    return run, surface, Metrics(m.sdf_error, m.rmse, cd)

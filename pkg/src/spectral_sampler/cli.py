"""Command-line front end: probe, recommend, plan, train, sweep, extract, eval and two demos.

Exit codes: 0 ok, 1 other error, 2 degenerate signal, 3 no cut-off, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import jsonschema
import numpy as np

from .encoding import EncodingSpec, highest_pe_frequency
from .geometry import extract_levelset, parse_target, write_obj
from .geometry.marching import Contour
from .nn_core import Mlp, NetworkConfig, evaluate_batched
from .sampling import build_plan, points_from_csv, points_to_csv, save_plan, validation_points
from .spectrum import (DEFAULT_TAU, DIRECTIONS, DegenerateSignalError, NoCutoffError, probe_network,
                       recommend_density)
from .svg import line_plot
from .trainer import TrainConfig, curve_to_csv, evaluate, surface_chamfer, sweep_rates, train, training_error

log = logging.getLogger("spectral_sampler")

EXIT_OK, EXIT_ERROR, EXIT_DEGENERATE, EXIT_NO_CUTOFF, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# schemas

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_NUM_OR_NULL = {"type": ["number", "null"]}

NETWORK_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "layers": {"type": "integer", "minimum": 1},
        "width": {"type": "integer", "minimum": 1},
        "encoding": {"enum": ["sinusoidal", "gaussian-fourier", "identity"]},
        "pe_degree": {"type": "integer", "minimum": 0},
        "ffe_sigma": {"type": "number", "exclusiveMinimum": 0},
        "ffe_features": {"type": "integer", "minimum": 1},
        "ffe_seed": _INT,
        "activation": {"enum": ["softplus", "sine"]},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "output": {"enum": ["tanh", "identity"]},
        "init": {"enum": ["default-uniform", "xavier-uniform"]},
        "seed": _INT,
    },
}

TRAIN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "iterations": {"type": "integer", "minimum": 0},
        "batch_size": {"type": "integer", "minimum": 1},
        "lr": {"type": "number", "exclusiveMinimum": 0},
        "decay_at": {"type": "number", "minimum": 0, "maximum": 1},
        "decay_factor": {"type": "number", "exclusiveMinimum": 0},
        "seed": _INT,
        "spectrum_period": {"type": "integer", "minimum": 0},
        "spectrum_points": {"type": "integer", "minimum": 2},
    },
}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "network": NETWORK_SCHEMA,
        "train": TRAIN_SCHEMA,
        "target": {"type": "string", "pattern": "^(circle|sphere|box|koch|mesh|signal):"},
        "sampling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rate": {"anyOf": [{"const": "auto"}, {"type": "number", "exclusiveMinimum": 0}]},
                "rates": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "restriction": {"enum": ["whole-domain", "active-cells"]},
                "grid_res": {"type": "integer", "minimum": 1},
                "seed": _INT,
                "validation_count": {"type": "integer", "minimum": 1},
                "validation_seed": _INT,
            },
        },
        "probe": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seeds": {"type": "integer", "minimum": 1},
                "points": {"type": "integer", "minimum": 16},
                "direction": {"enum": list(DIRECTIONS)},
                "tau": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "out": {"type": "string"},
    },
}

_FIT = {
    "type": "object",
    "required": ["a", "b", "residual", "converged", "F_c", "tau"],
    "properties": {"a": _NUM, "b": _NUM, "residual": _NUM, "converged": {"type": "boolean"},
                   "F_c": _NUM, "tau": _NUM, "dims": _INT, "rate": _NUM, "mu": _NUM},
}
_METRICS = {
    "type": "object",
    "required": ["sdf_error", "rmse", "chamfer"],
    "properties": {"sdf_error": _NUM, "rmse": _NUM, "chamfer": _NUM_OR_NULL},
}
_CURVE_POINT = {
    "type": "object",
    "required": ["rate", "sdf_error", "rmse", "train_error", "samples", "failure"],
    "properties": {"rate": _NUM, "sdf_error": _NUM_OR_NULL, "rmse": _NUM_OR_NULL,
                   "train_error": _NUM_OR_NULL, "samples": _INT,
                   "failure": {"type": ["string", "null"]}},
}

OUTPUT_SCHEMAS = {
    "probe": {"type": "object", "required": ["fit", "network", "probe"],
              "properties": {"fit": _FIT, "network": {"type": "object"}, "probe": {"type": "object"}}},
    "recommend": {"type": "object", "required": ["F_c", "dims", "rate", "mu"],
                  "properties": {"F_c": _NUM, "dims": _INT, "rate": _NUM, "mu": _NUM}},
    "plan": {"type": "object", "required": ["F_c", "dims", "rate", "spacing", "restriction", "seed", "count"],
             "properties": {"F_c": _NUM, "dims": _INT, "rate": _NUM, "spacing": _NUM,
                            "restriction": {"enum": ["whole-domain", "active-cells"]},
                            "seed": _INT, "count": _INT}},
    "train": {"type": "object", "required": ["rate", "samples", "final_loss", "train_error", "metrics"],
              "properties": {"rate": _NUM, "samples": _INT, "final_loss": _NUM_OR_NULL,
                             "train_error": _NUM, "metrics": _METRICS}},
    "sweep": {"type": "object", "required": ["target", "curve"],
              "properties": {"target": {"type": "string"}, "recommended_rate": _NUM_OR_NULL,
                             "curve": {"type": "array", "items": _CURVE_POINT}}},
    "extract": {"type": "object", "required": ["empty", "vertices", "chamfer"],
                "properties": {"empty": {"type": "boolean"}, "vertices": _INT, "chamfer": _NUM_OR_NULL}},
    "eval": _METRICS,
    "demo-aliasing": {"type": "object", "required": ["F_c", "results", "ratio_pe_to_nyquist",
                                                     "change_nyquist_to_double"],
                      "properties": {"F_c": _NUM, "results": {"type": "array"},
                                     "ratio_pe_to_nyquist": _NUM, "change_nyquist_to_double": _NUM}},
    "demo-koch": {"type": "object", "required": ["F_c", "results", "decreasing", "change_1x_to_2x"],
                  "properties": {"F_c": _NUM, "results": {"type": "array"},
                                 "decreasing": {"type": "boolean"}, "change_1x_to_2x": _NUM}},
}


def validate_output(command: str, doc) -> None:
    jsonschema.validate(doc, OUTPUT_SCHEMAS[command])


def load_experiment(path) -> dict:
    """Read and schema-check an ExperimentConfig; unknown keys are rejected."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(doc, EXPERIMENT_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"invalid config {path} at {where}: {exc.message}") from exc
    return doc


# ---------------------------------------------------------------------------
# flag plumbing

_NETWORK_FLAGS = {
    # flag dest -> (config key, builtin default)
    "layers": ("layers", None),
    "width": ("width", 512),
    "pe_degree": ("pe_degree", None),
    "ffe_sigma": ("ffe_sigma", None),
    "ffe_features": ("ffe_features", 256),
    "ffe_seed": ("ffe_seed", 0),
    "activation": ("activation", "softplus"),
    "beta": ("beta", 100.0),
    "omega": ("omega", 30.0),
    "output": ("output", "tanh"),
    "init": ("init", "default-uniform"),
    "net_seed": ("seed", 0),
}

_TRAIN_FLAGS = {
    "iterations": "iterations",
    "batch_size": "batch_size",
    "lr": "lr",
    "train_seed": "seed",
    "spectrum_period": "spectrum_period",
}


def _pick(args, dest, section: dict, key, default):
    v = getattr(args, dest, None)
    if v is not None:
        return v
    return section.get(key, default)


def add_network_args(p, layers_required=False):
    g = p.add_argument_group("network")
    g.add_argument("--layers", type=int, required=layers_required, help="hidden layers")
    g.add_argument("--width", type=int, help="hidden width (default 512)")
    enc = g.add_mutually_exclusive_group()
    enc.add_argument("--pe-degree", type=int, help="sinusoidal PE degree D (default 5)")
    enc.add_argument("--ffe-sigma", type=float, help="Gaussian Fourier features with this std")
    enc.add_argument("--no-encoding", action="store_true", help="feed raw coordinates")
    g.add_argument("--ffe-features", type=int, help="number of Fourier features (default 256)")
    g.add_argument("--ffe-seed", type=int)
    g.add_argument("--activation", choices=["softplus", "sine"])
    g.add_argument("--beta", type=float, help="softplus sharpness (default 100)")
    g.add_argument("--omega", type=float, help="sine frequency factor (default 30)")
    g.add_argument("--output", choices=["tanh", "identity"])
    g.add_argument("--init", choices=["default-uniform", "xavier-uniform"])
    g.add_argument("--net-seed", type=int, help="base seed for initialization (default 0)")


def add_train_args(p):
    g = p.add_argument_group("training")
    g.add_argument("--iterations", type=int, help="default 5000")
    g.add_argument("--batch-size", type=int, help="default 4096")
    g.add_argument("--lr", type=float, help="default 1e-4")
    g.add_argument("--train-seed", type=int, help="minibatch shuffling seed (default 0)")
    g.add_argument("--spectrum-period", type=int, help="probe the cut-off every N iterations (0 = off)")
    g.add_argument("--full-scale", action="store_true", help="30k iterations, batch 100k")


def add_probe_args(p):
    g = p.add_argument_group("probe")
    g.add_argument("--seeds", type=int, help="networks averaged, M (default 5)")
    g.add_argument("--points", type=int, help="samples along the probe line (default 8192)")
    g.add_argument("--direction", choices=DIRECTIONS)
    g.add_argument("--tau", type=float, help=f"slope threshold (default {DEFAULT_TAU})")


def network_from(args, cfg: dict, input_dim: int) -> NetworkConfig:
    sec = cfg.get("network", {})
    vals = {dest: _pick(args, dest, sec, key, default) for dest, (key, default) in _NETWORK_FLAGS.items()}
    if vals["layers"] is None:
        raise UsageError("the number of hidden layers is required (--layers or network.layers)")
    if getattr(args, "no_encoding", False) or sec.get("encoding") == "identity":
        enc = EncodingSpec("identity", input_dim)
    elif vals["ffe_sigma"] is not None or sec.get("encoding") == "gaussian-fourier":
        if vals["ffe_sigma"] is None:
            raise UsageError("gaussian-fourier encoding needs ffe_sigma")
        enc = EncodingSpec("gaussian-fourier", input_dim, sigma=vals["ffe_sigma"],
                           features=vals["ffe_features"], seed=vals["ffe_seed"])
    else:
        degree = vals["pe_degree"] if vals["pe_degree"] is not None else 5
        enc = EncodingSpec("sinusoidal", input_dim, degree=degree)
    try:
        return NetworkConfig(input_dim=input_dim, num_hidden_layers=vals["layers"], hidden_width=vals["width"],
                             hidden_activation=vals["activation"], beta=vals["beta"], omega=vals["omega"],
                             output_activation=vals["output"], encoding=enc, init_scheme=vals["init"],
                             seed=vals["net_seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def train_config_from(args, cfg: dict) -> TrainConfig:
    sec = dict(cfg.get("train", {}))
    base = TrainConfig.full_scale() if getattr(args, "full_scale", False) else TrainConfig()
    vals = asdict(base)
    vals.update(sec)
    for dest, key in _TRAIN_FLAGS.items():
        v = getattr(args, dest, None)
        if v is not None:
            vals[key] = v
    try:
        return TrainConfig(**vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def probe_settings(args, cfg: dict) -> dict:
    sec = cfg.get("probe", {})
    return {"M": _pick(args, "seeds", sec, "seeds", 5), "n": _pick(args, "points", sec, "points", 8192),
            "direction": _pick(args, "direction", sec, "direction", "axis-x"),
            "tau": _pick(args, "tau", sec, "tau", DEFAULT_TAU)}


def _config(args) -> dict:
    return load_experiment(args.config) if getattr(args, "config", None) else {}


def _out_dir(args, cfg) -> Path:
    out = Path(getattr(args, "out", None) or cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _target_spec(args, cfg) -> str:
    spec = getattr(args, "target", None) or cfg.get("target")
    if not spec:
        raise UsageError("a target is required (--target or target in the config)")
    return spec


def _parse_target(spec):
    try:
        return parse_target(spec)
    except ValueError as exc:
        if "unknown target" in str(exc) or "could not convert" in str(exc):
            raise UsageError(str(exc)) from exc
        raise


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    log.info("wrote %s", path)


def _write_json(path: Path, doc) -> None:
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _emit(args, command: str, doc, human: str) -> None:
    validate_output(command, doc)
    if getattr(args, "json", False):
        print(json.dumps(doc, sort_keys=True))
    else:
        print(human)


def _jobs(requested: int) -> int:
    cap = os.environ.get("SPECTRAL_SAMPLER_THREADS")
    return max(1, min(requested, int(cap))) if cap else max(1, requested)


def _finite_or_none(v):
    return None if v is None or not math.isfinite(v) else float(v)


# ---------------------------------------------------------------------------
# commands


def _run_probe(config: NetworkConfig, settings: dict, out: Path):
    sp, fit = probe_network(config, settings["M"], settings["n"], settings["direction"], settings["tau"])
    _write(out / "spectrum.csv", sp.to_csv())
    fit_doc = fit.to_dict(config.input_dim)
    fit_doc["network"] = config.to_dict()
    _write_json(out / "fit.json", fit_doc)
    keep = sp.frequencies > 0
    f = sp.frequencies[keep]
    _write(out / "spectrum.svg", line_plot(
        [("mean spectrum", f, sp.magnitudes[keep]), ("fitted curve", f, fit.curve(f))],
        title="intrinsic spectrum", xlabel="frequency", ylabel="magnitude", logx=True, logy=True,
        vlines=[(f"F_c = {fit.cutoff:.1f}", fit.cutoff)]))
    return sp, fit


def cmd_probe(args) -> int:
    cfg = _config(args)
    config = network_from(args, cfg, args.dims)
    settings = probe_settings(args, cfg)
    out = _out_dir(args, cfg)
    _, fit = _run_probe(config, settings, out)
    rate, mu = recommend_density(fit.cutoff, config.input_dim)
    doc = {"fit": fit.to_dict(config.input_dim), "network": config.to_dict(), "probe": settings}
    _emit(args, "probe", doc,
          f"F_c = {fit.cutoff:.4f}  (a = {fit.a:.4g}, b = {fit.b:.4g}, converged = {fit.converged})\n"
          f"rate = {rate:.4f} per unit, mu = {mu:.6g} for {config.input_dim}-d")
    return EXIT_OK


def _read_fit(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        fc = float(doc["F_c"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed fit file {path}: {exc}") from exc
    if not (math.isfinite(fc) and fc > 0):
        raise ValueError(f"malformed fit file {path}: F_c must be a positive number")
    return doc


def cmd_recommend(args) -> int:
    doc = _read_fit(args.fit)
    dims = args.dims or doc.get("dims")
    if dims not in (1, 2, 3):
        raise UsageError("--dims must be 1, 2 or 3")
    rate, mu = recommend_density(float(doc["F_c"]), dims)
    mu_out = int(round(mu)) if float(mu).is_integer() else mu
    rate_out = int(rate) if float(rate).is_integer() else rate
    out = {"F_c": float(doc["F_c"]), "dims": dims, "rate": rate_out, "mu": mu_out}
    _emit(args, "recommend", out, f"rate = {rate_out}\nmu = {mu_out:,}" if isinstance(mu_out, int)
          else f"rate = {rate_out}\nmu = {mu_out}")
    return EXIT_OK


def _cutoff_arg(args):
    if args.fit:
        return float(_read_fit(args.fit)["F_c"])
    if args.cutoff is not None:
        return args.cutoff
    if args.rate is not None:
        return args.rate / 2.0
    raise UsageError("one of --fit, --cutoff or --rate is required")


def cmd_plan(args) -> int:
    target = _parse_target(args.target)
    fc = _cutoff_arg(args)
    restriction = args.restriction or ("active-cells" if target.has_surface else "whole-domain")
    plan = build_plan(fc, target.dim, target, restriction, seed=args.seed, spacing=args.spacing,
                      grid_res=args.grid_res, max_points=args.max_points)
    out = _out_dir(args, {})
    save_plan(plan, out / "plan.csv", out / "plan.json")
    head = plan.header()
    _emit(args, "plan", head, f"{len(plan)} points at rate {plan.rate:.4f} ({restriction})")
    return EXIT_OK


def _sampling(args, cfg):
    sec = cfg.get("sampling", {})
    return {
        "restriction": _pick(args, "restriction", sec, "restriction", None),
        "grid_res": _pick(args, "grid_res", sec, "grid_res", 20),
        "seed": _pick(args, "plan_seed", sec, "seed", 0),
        "validation_count": _pick(args, "validation_count", sec, "validation_count", 10_000),
        "validation_seed": _pick(args, "validation_seed", sec, "validation_seed", 1),
        "rate": _pick(args, "rate", sec, "rate", None),
        "rates": sec.get("rates"),
    }


def _parse_rate(text):
    if text is None or text == "auto":
        return text
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"--rate must be a positive number or 'auto', got {text!r}") from None
    if not v > 0:
        raise UsageError("--rate must be positive")
    return v


def cmd_train(args) -> int:
    cfg = _config(args)
    spec = _target_spec(args, cfg)
    target = _parse_target(spec)
    config = network_from(args, cfg, target.dim)
    tcfg = train_config_from(args, cfg)
    smp = _sampling(args, cfg)
    out = _out_dir(args, cfg)
    rate = _parse_rate(smp["rate"])
    if rate is None:
        raise UsageError("--rate is required (a number or 'auto')")
    if rate == "auto":
        _, fit = _run_probe(config, probe_settings(args, cfg), out)
        rate, _ = recommend_density(fit.cutoff, target.dim)
        log.info("recommended rate %.4f from F_c %.4f", rate, fit.cutoff)
    restriction = smp["restriction"] or ("active-cells" if target.has_surface else "whole-domain")
    plan = build_plan(rate / 2.0, target.dim, target, restriction, seed=smp["seed"], grid_res=smp["grid_res"])
    save_plan(plan, out / "plan.csv", out / "plan.json")
    run = train(config, tcfg, plan)
    run.save(out / "run.json", out / "checkpoint.json")
    val = validation_points(plan, smp["validation_count"], smp["validation_seed"])
    _write(out / "validation.csv", points_to_csv(*val))
    m = evaluate(run, target, val)
    _write_json(out / "metrics.json", m.to_dict())
    its = np.arange(1, len(run.loss_history) + 1)
    _write(out / "loss.svg", line_plot([("training L1", its, run.loss_history)], title="training loss",
                                       xlabel="iteration", ylabel="L1", logy=True))
    doc = {"rate": float(rate), "samples": len(plan), "final_loss": _finite_or_none(run.final_loss),
           "train_error": training_error(run, plan), "metrics": m.to_dict()}
    _emit(args, "train", doc, f"trained on {len(plan)} points at rate {rate:.4f}: "
                              f"eps_SDF = {m.sdf_error:.4e}, RMSE = {m.rmse:.4e}")
    return EXIT_OK


def _parse_rates(text):
    try:
        rates = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--rates must be a comma-separated list of numbers, got {text!r}") from None
    if not rates or min(rates) <= 0:
        raise UsageError("--rates must hold positive numbers")
    return rates


def _point_doc(p):
    return {"rate": p.rate, "sdf_error": _finite_or_none(p.sdf_error), "rmse": _finite_or_none(p.rmse),
            "train_error": _finite_or_none(p.train_error), "samples": p.samples, "failure": p.failure}


def cmd_sweep(args) -> int:
    cfg = _config(args)
    spec = _target_spec(args, cfg)
    target = _parse_target(spec)
    config = network_from(args, cfg, target.dim)
    tcfg = train_config_from(args, cfg)
    smp = _sampling(args, cfg)
    out = _out_dir(args, cfg)
    recommended = None
    if args.multiples:
        _, fit = _run_probe(config, probe_settings(args, cfg), out)
        recommended, _ = recommend_density(fit.cutoff, target.dim)
        rates = [m * recommended for m in _parse_rates(args.multiples)]
    elif args.rates:
        rates = _parse_rates(args.rates)
    elif smp["rates"]:
        rates = [float(r) for r in smp["rates"]]
    else:
        raise UsageError("--rates or --multiples is required")
    curve = sweep_rates(config, tcfg, target, rates, smp["restriction"], smp["validation_count"],
                        smp["validation_seed"], jobs=_jobs(args.jobs), grid_res=smp["grid_res"])
    _write(out / "curve.csv", curve_to_csv(curve))
    ok = [p for p in curve if p.failure is None]
    vlines = [(f"2F_c = {recommended:.1f}", recommended)] if recommended else []
    _write(out / "curve.svg", line_plot([("eps_SDF", [p.rate for p in ok], [p.sdf_error for p in ok])],
                                        title=f"error vs sampling rate ({spec})", xlabel="rate per unit",
                                        ylabel="mean |SDF error|", logy=True, vlines=vlines))
    doc = {"target": spec, "recommended_rate": recommended, "curve": [_point_doc(p) for p in curve]}
    _write_json(out / "sweep.json", doc)
    lines = [f"{p.rate:10.4f}  " + (f"{p.sdf_error:.4e}  ({p.samples} samples)" if p.failure is None
                                    else f"failed: {p.failure}") for p in curve]
    _emit(args, "sweep", doc, "\n".join(lines))
    failed = sum(p.failure is not None for p in curve)
    return EXIT_ERROR if failed == len(curve) else EXIT_OK


def _load_checkpoint(path) -> Mlp:
    try:
        with open(path) as fh:
            return Mlp.from_json(fh.read())
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"cannot load checkpoint {path}: {exc}") from exc


def cmd_extract(args) -> int:
    mlp = _load_checkpoint(args.checkpoint)
    dim = mlp.config.input_dim
    if dim not in (2, 3):
        raise UsageError("extraction needs a 2-d or 3-d network")
    out = _out_dir(args, {})
    field = lambda p: evaluate_batched(mlp, p)  # noqa: E731
    target = _parse_target(args.target) if args.target else None
    if target is not None:
        surface, cd = surface_chamfer(field, target, args.resolution, args.surface_samples, args.seed)
    else:
        surface, cd = extract_levelset(field, args.resolution, dim), None
    if isinstance(surface, Contour):
        _write(out / "contour.svg", surface.to_svg())
        _write(out / "contour.csv", surface.to_csv())
    else:
        write_obj(out / "surface.obj", surface.vertices, surface.faces)
    if target is not None:
        # keep errors a previous train/eval wrote next to the checkpoint
        path = out / "metrics.json"
        metrics = json.loads(path.read_text()) if path.exists() else {"sdf_error": None, "rmse": None}
        metrics["chamfer"] = cd
        _write_json(path, metrics)
    doc = {"empty": bool(surface.empty), "vertices": int(len(surface.vertices)), "chamfer": cd}
    _emit(args, "extract", doc, "empty surface" if surface.empty else
          f"{len(surface.vertices)} vertices" + (f", Chamfer = {cd:.4e}" if cd is not None else ""))
    return EXIT_OK


def cmd_eval(args) -> int:
    mlp = _load_checkpoint(args.checkpoint)
    try:
        pts, labels = points_from_csv(Path(args.validation).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read {args.validation}: {exc}") from exc
    if pts.shape[1] != mlp.config.input_dim:
        raise ValueError("validation points do not match the network's input dimension")
    m = evaluate(mlp, None, (pts, labels))
    if args.out:
        _write_json(_out_dir(args, {}) / "metrics.json", m.to_dict())
    _emit(args, "eval", m.to_dict(), f"eps_SDF = {m.sdf_error:.6e}\nRMSE = {m.rmse:.6e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# demonstrations


def cmd_demo_aliasing(args) -> int:
    """Same network trained at the PE rate, the recommended rate and twice that."""
    out = _out_dir(args, {})
    target = _parse_target(f"signal:{args.signal}")
    config = network_from(args, {}, 1)
    if config.encoding.kind != "sinusoidal":
        raise UsageError("the aliasing demo compares against the PE rate; use a sinusoidal encoding")
    tcfg = train_config_from(args, {})
    _, fit = _run_probe(config, probe_settings(args, {}), out)
    pe_rate = 2.0 * highest_pe_frequency(config.encoding.degree)
    nyquist, _ = recommend_density(fit.cutoff, 1)
    labels = ["pe-rate", "nyquist", "double-nyquist"]
    rates = [pe_rate, nyquist, 2.0 * nyquist]
    curve = sweep_rates(config, tcfg, target, rates, "whole-domain", args.validation_count,
                        args.validation_seed, jobs=_jobs(args.jobs))
    for p in curve:
        if p.failure is not None:
            raise RuntimeError(f"training at rate {p.rate} failed: {p.failure}")

    xs = np.linspace(-1.0, 1.0, 2001)
    truth = target.sdf(xs)
    series = [("target", xs, truth)]
    results = []
    for label, rate, point in zip(labels, rates, curve):
        plan = build_plan(rate / 2.0, 1, target, "whole-domain")
        pred = evaluate_batched(point.run.mlp, xs[:, None])
        series.append((label, xs, pred))
        _write(out / f"field_{label}.svg", line_plot(
            [("target", xs, truth), (f"learned ({label})", xs, pred),
             ("samples", plan.points[:, 0], plan.labels)],
            title=f"{args.signal} at rate {rate:.2f}", xlabel="x", ylabel="value"))
        results.append({"label": label, **_point_doc(point)})
    _write(out / "fields.svg", line_plot(series, title="learned fields", xlabel="x", ylabel="value"))
    _write(out / "curve.csv", curve_to_csv(curve))

    e_pe, e_ny, e_2ny = (p.sdf_error for p in curve)
    report = {
        "signal": args.signal,
        "network": config.to_dict(),
        "train": asdict(tcfg),
        "F_c": fit.cutoff,
        "pe_rate": pe_rate,
        "results": results,
        "ratio_pe_to_nyquist": e_pe / e_ny,
        "change_nyquist_to_double": abs(e_ny - e_2ny) / e_ny,
        "train_error_spread": max(p.train_error for p in curve) / min(p.train_error for p in curve),
    }
    _write_json(out / "report.json", report)
    _emit(args, "demo-aliasing", report,
          "\n".join(f"{r['label']:>15}  rate {r['rate']:8.3f}  eps_SDF {r['sdf_error']:.4e}  "
                    f"train {r['train_error']:.4e}" for r in results)
          + f"\nPE-rate / Nyquist error ratio: {report['ratio_pe_to_nyquist']:.2f}"
          + f"\nNyquist -> 2x Nyquist relative change: {report['change_nyquist_to_double']:.3f}")
    return EXIT_OK


def cmd_demo_koch(args) -> int:
    """Koch snowflake swept at fractions and multiples of the recommended rate."""
    out = _out_dir(args, {})
    target = _parse_target(f"koch:{args.degree}")
    config = network_from(args, {}, 2)
    tcfg = train_config_from(args, {})
    _, fit = _run_probe(config, probe_settings(args, {}), out)
    nyquist, _ = recommend_density(fit.cutoff, 2)
    multiples = _parse_rates(args.multiples)
    rates = [m * nyquist for m in multiples]
    curve = sweep_rates(config, tcfg, target, rates, "active-cells", args.validation_count,
                        args.validation_seed, jobs=_jobs(args.jobs))
    results = []
    for m, rate, point in zip(multiples, rates, curve):
        entry = {"multiple": m, **_point_doc(point)}
        if point.failure is None and args.contours:
            surface, cd = surface_chamfer(point.run, target, args.resolution, 20_000, 0)
            _write(out / f"contour_{m:g}x.svg", surface.to_svg())
            entry["chamfer"] = cd
        results.append(entry)
    _write(out / "curve.csv", curve_to_csv(curve))
    ok = [p for p in curve if p.failure is None]
    _write(out / "curve.svg", line_plot([("eps_SDF", [p.rate for p in ok], [p.sdf_error for p in ok])],
                                        title=f"Koch snowflake (degree {args.degree})",
                                        xlabel="rate per unit", ylabel="mean |SDF error|", logy=True,
                                        vlines=[(f"2F_c = {nyquist:.1f}", nyquist)]))
    errs = [p.sdf_error for p in curve]
    i1 = multiples.index(1.0) if 1.0 in multiples else None
    i2 = multiples.index(2.0) if 2.0 in multiples else None
    change = abs(errs[i1] - errs[i2]) / errs[i1] if i1 is not None and i2 is not None else math.nan
    report = {
        "degree": args.degree,
        "network": config.to_dict(),
        "train": asdict(tcfg),
        "F_c": fit.cutoff,
        "recommended_rate": nyquist,
        "results": results,
        "decreasing": bool(all(a > b for a, b in zip(errs, errs[1:]))),
        "change_1x_to_2x": change if math.isfinite(change) else -1.0,
    }
    _write_json(out / "report.json", report)
    _emit(args, "demo-koch", report,
          "\n".join(f"{r['multiple']:>5g}x  rate {r['rate']:8.3f}  eps_SDF {r['sdf_error']}" for r in results))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spectral-sampler", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        sp.add_argument("--out", help="output directory (default: current directory)")
        sp.add_argument("--json", action="store_true", help="print a machine-readable result")
        if config:
            sp.add_argument("--config", help="ExperimentConfig JSON")

    sp = sub.add_parser("probe", help="intrinsic spectrum, fit and cut-off of a random network")
    add_network_args(sp, layers_required=True)
    add_probe_args(sp)
    sp.add_argument("--dims", type=int, choices=[1, 2, 3], default=1, help="network input dimension")
    common(sp)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("recommend", help="sampling rate and density from a fit.json")
    sp.add_argument("fit")
    sp.add_argument("--dims", type=int, choices=[1, 2, 3])
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_recommend)

    sp = sub.add_parser("plan", help="build a grid sampling plan")
    sp.add_argument("--target", required=True)
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--fit")
    src.add_argument("--cutoff", type=float)
    src.add_argument("--rate", type=float)
    sp.add_argument("--restriction", choices=["whole-domain", "active-cells"])
    sp.add_argument("--spacing", type=float)
    sp.add_argument("--grid-res", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-points", type=int, default=5_000_000)
    common(sp, config=False)
    sp.set_defaults(func=cmd_plan)

    def sampling_args(sp):
        g = sp.add_argument_group("sampling")
        g.add_argument("--target")
        g.add_argument("--restriction", choices=["whole-domain", "active-cells"])
        g.add_argument("--grid-res", type=int)
        g.add_argument("--plan-seed", type=int)
        g.add_argument("--validation-count", type=int)
        g.add_argument("--validation-seed", type=int)

    sp = sub.add_parser("train", help="fit a network to a target")
    add_network_args(sp)
    add_train_args(sp)
    add_probe_args(sp)
    sampling_args(sp)
    sp.add_argument("--rate", help="per-axis sampling rate, or 'auto' to probe first")
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("sweep", help="train once per sampling rate")
    add_network_args(sp)
    add_train_args(sp)
    add_probe_args(sp)
    sampling_args(sp)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--rates", help="comma-separated per-axis rates")
    g.add_argument("--multiples", help="comma-separated multiples of the recommended rate")
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("extract", help="zero level set of a trained network")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--resolution", type=int, default=128)
    sp.add_argument("--target", help="compare against this target's surface (Chamfer)")
    sp.add_argument("--surface-samples", type=int, default=20_000)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, config=False)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("eval", help="errors of a trained network on labelled points")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--validation", required=True, help="CSV with x[,y,z],sdf columns")
    common(sp, config=False)
    sp.set_defaults(func=cmd_eval)

    def demo_common(sp, layers, width, degree):
        add_network_args(sp)
        add_train_args(sp)
        add_probe_args(sp)
        sp.set_defaults(layers=layers, width=width, pe_degree=degree)
        sp.add_argument("--validation-count", type=int, default=20_000)
        sp.add_argument("--validation-seed", type=int, default=1)
        sp.add_argument("--jobs", type=int, default=1)
        common(sp, config=False)

    sp = sub.add_parser("demo-aliasing", help="1-d training aliasing demonstration")
    demo_common(sp, 4, 128, 4)
    sp.add_argument("--signal", default="composite", choices=["sin1", "sin4", "composite", "intervals"])
    sp.set_defaults(func=cmd_demo_aliasing)

    sp = sub.add_parser("demo-koch", help="Koch snowflake sampling-rate sweep")
    demo_common(sp, 4, 128, 4)
    sp.add_argument("--degree", type=int, default=3, choices=[0, 1, 2, 3])
    sp.add_argument("--multiples", default="0.5,1,2")
    sp.add_argument("--resolution", type=int, default=256)
    sp.add_argument("--no-contours", dest="contours", action="store_false",
                    help="skip level-set extraction")
    sp.set_defaults(func=cmd_demo_koch)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateSignalError as exc:
        print(f"error: degenerate signal: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NoCutoffError as exc:
        print(f"error: no cut-off: {exc}", file=sys.stderr)
        return EXIT_NO_CUTOFF
    except Exception as exc:  # any module error -> nonzero exit with a message
        log.debug("traceback", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

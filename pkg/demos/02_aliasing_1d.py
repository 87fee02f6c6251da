"""Training aliasing in 1-d: the same network fitted from sparse and Nyquist-rate grids.

At the PE rate the fit through the samples is just as tight, but between the
samples the network is free to oscillate at its own (much higher) frequencies.

    python3 demos/02_aliasing_1d.py [--iterations 5000] [--signal composite]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from spectral_sampler import TrainConfig, build_plan, pe_network, probe_network, train, validation_points
from spectral_sampler.geometry.shapes import Signal1D
from spectral_sampler.nn_core import evaluate_batched
from spectral_sampler.svg import line_plot
from spectral_sampler.trainer import evaluate, training_error

ap = argparse.ArgumentParser()
ap.add_argument("--iterations", type=int, default=5000)
ap.add_argument("--signal", default="composite")
ap.add_argument("--out", default="demo_out/aliasing")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

cfg = pe_network(1, 4, 128, 4, seed=0)
target = Signal1D(args.signal)
_, fit = probe_network(cfg)
print(f"cut-off {fit.cutoff:.2f}, so the Nyquist rate is {2 * fit.cutoff:.1f} samples per unit")

rates = {"PE rate": 2.0 ** cfg.encoding.degree, "Nyquist": 2 * fit.cutoff, "2x Nyquist": 4 * fit.cutoff}
dense_plan = build_plan(max(rates.values()) / 2, 1, target, "whole-domain")
val = validation_points(dense_plan, 20_000, seed=1)
xs = np.linspace(-1, 1, 2001)
series = [("target", xs, target.sdf(xs))]
for name, rate in rates.items():
    plan = build_plan(rate / 2, 1, target, "whole-domain")
    run = train(cfg, TrainConfig(iterations=args.iterations), plan)
    m = evaluate(run, target, val)
    print(f"{name:>11}: {len(plan):4d} samples, train L1 {training_error(run, plan):.2e}, "
          f"validation eps_SDF {m.sdf_error:.2e}")
    series.append((name, xs, evaluate_batched(run.mlp, xs[:, None])))

(out / "fields.svg").write_text(line_plot(series, title="learned fields", xlabel="x", ylabel="value"))
print(f"plot: {out / 'fields.svg'}")

"""Koch snowflake SDF fitted at half, one and two times the recommended rate.

Takes about 20 minutes on one core with the default 5000 iterations.

    python3 demos/03_koch_snowflake.py [--iterations 5000]
"""

from __future__ import annotations

import argparse
from pathlib import Path

from spectral_sampler import TrainConfig, pe_network, probe_network, sweep_rates
from spectral_sampler.geometry import koch_snowflake
from spectral_sampler.trainer import surface_chamfer

ap = argparse.ArgumentParser()
ap.add_argument("--iterations", type=int, default=5000)
ap.add_argument("--out", default="demo_out/koch")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

cfg = pe_network(2, 4, 128, 4, seed=0)
snow = koch_snowflake(3)
_, fit = probe_network(cfg)
nyq = 2 * fit.cutoff
print(f"cut-off {fit.cutoff:.2f}, recommended rate {nyq:.1f} per unit")

curve = sweep_rates(cfg, TrainConfig(iterations=args.iterations), snow, [0.5 * nyq, nyq, 2 * nyq])
for mult, p in zip((0.5, 1, 2), curve):
    contour, cd = surface_chamfer(p.run, snow, 256)
    (out / f"contour_{mult:g}x.svg").write_text(contour.to_svg())
    print(f"{mult:>4g}x: {p.samples:6d} samples, eps_SDF {p.sdf_error:.2e}, "
          f"train L1 {p.train_error:.2e}, Chamfer {cd:.2e}")
print(f"zero-level contours in {out}")

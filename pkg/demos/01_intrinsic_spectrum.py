"""Probe randomly initialized PE-MLPs and read off their cut-off frequencies.

    python3 demos/01_intrinsic_spectrum.py            # reference 8x512 networks, ~20 s
    python3 demos/01_intrinsic_spectrum.py --quick    # 4x128 networks
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from spectral_sampler import highest_pe_frequency, pe_network, probe_network, recommend_density
from spectral_sampler.spectrum import pairwise_cosine
from spectral_sampler.svg import line_plot

ap = argparse.ArgumentParser()
ap.add_argument("--quick", action="store_true")
ap.add_argument("--out", default="demo_out/spectrum")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

layers, width = (4, 128) if args.quick else (8, 512)
series, lines = [], []
for degree in (3, 4, 5):
    sp, fit = probe_network(pe_network(1, layers, width, degree, seed=0), M=5, n=8192)
    cos = pairwise_cosine(sp.members)
    keep = sp.frequencies > 0
    series.append((f"D={degree}", sp.frequencies[keep], sp.magnitudes[keep]))
    lines.append((f"F_c(D={degree})", fit.cutoff))
    rate, mu = recommend_density(fit.cutoff, 3)
    print(f"D={degree}: highest PE frequency {highest_pe_frequency(degree):4g}, "
          f"F_c {fit.cutoff:6.2f}, member cosine min {cos[~np.eye(5, dtype=bool)].min():.2f}, "
          f"3-d density {mu:,.0f} ({rate:.1f} per axis)")

# the cut-off sits far above the largest PE frequency: the MLP itself adds spectrum
(out / "spectra.svg").write_text(line_plot(series, title=f"{layers}x{width} PE-MLP spectra",
                                           xlabel="frequency", ylabel="magnitude", logx=True, logy=True,
                                           vlines=lines))
print(f"plot: {out / 'spectra.svg'}")

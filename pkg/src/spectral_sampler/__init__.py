"""Sampling-rate selection for coordinate networks from their intrinsic response spectrum.

A randomly initialized MLP (optionally with a positional encoding) is probed along a
line, the averaged spectrum is fitted with ``a / (F**2 + b)``, and the cut-off where the
fitted curve flattens sets a Nyquist rate ``2 F_c`` for the training grid.
"""

from .encoding import EncodingSpec, encode, highest_pe_frequency
from .nn_core import AdamState, Mlp, NetworkConfig, adam_step, forward, init_network, loss_and_grad, pe_network
from .sampling import SamplingPlan, build_plan, offset_samples, validation_points
from .spectrum import (DegenerateSignalError, NoCutoffError, Spectrum, SpectrumFit, cutoff_frequency,
                       fft_magnitude, fit_spectrum_curve, intrinsic_spectrum, probe_network,
                       probe_trained_network, recommend_density)
from .trainer import Metrics, TrainConfig, TrainRun, evaluate, fit_and_extract, sweep_rates, train

__version__ = "0.1.0"

__all__ = [
    "AdamState", "DegenerateSignalError", "EncodingSpec", "Metrics", "Mlp", "NetworkConfig",
    "NoCutoffError", "SamplingPlan", "Spectrum", "SpectrumFit", "TrainConfig", "TrainRun",
    "adam_step", "build_plan", "cutoff_frequency", "encode", "evaluate", "fft_magnitude",
    "fit_and_extract", "fit_spectrum_curve", "forward", "highest_pe_frequency", "init_network",
    "intrinsic_spectrum", "loss_and_grad", "offset_samples", "pe_network", "probe_network",
    "probe_trained_network", "recommend_density", "sweep_rates", "train", "validation_points",
]

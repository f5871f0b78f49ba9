"""Optical FFT (OFFT) convolution engine simulator and performance model."""
from . import conv, core, perf, photonics
from ._backend import NAME as backend
from .conv import complex_readout, conv_rate, convolve, fft2d, ifft2d
from .core import (CouplerConvention, NetworkPlan, OfftError, dft_oracle, match_to_dft,
                   plan_network, propagate, transfer_matrix)
from .perf import fom_sweep
from .photonics import calibrate, inject_phase_errors, propagate_impaired

__version__ = "0.1.0"

__all__ = [
    "backend", "conv", "core", "perf", "photonics",
    "CouplerConvention", "NetworkPlan", "OfftError",
    "plan_network", "propagate", "transfer_matrix", "dft_oracle", "match_to_dft",
    "inject_phase_errors", "propagate_impaired", "calibrate",
    "complex_readout", "fft2d", "ifft2d", "convolve", "conv_rate", "fom_sweep",
]

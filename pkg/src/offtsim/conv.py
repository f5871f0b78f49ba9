"""2D circular convolution on a reused 1D OFFT.

Every 1D transform is read out in two cycles: the real part of the network
output for the input, then for the input multiplied by i.  Rows then columns
give the 2D transform; the inverse reuses the forward network by conjugation.
Optional DAC/ADC quantization models the converters at both ends of each pass.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import NetworkPlan, OfftError, dft_oracle, log2_int, match_to_dft, propagate, transfer_matrix
from .photonics import PARALLEL, SERIAL, _mode


class PassCounter:
    """Counts network passes and two-cycle readouts; safe to share across threads."""

    def __init__(self):
        self._lock = threading.Lock()
        self.passes = 0
        self.readouts = 0

    def add(self, passes, readouts):
        with self._lock:
            self.passes += passes
            self.readouts += readouts


@dataclass(frozen=True)
class Quantization:
    """Uniform converter resolution for the analog boundary of each pass.

    Both converters range per frame: each of the two DAC channels (real and
    imaginary part) takes the largest magnitude it must drive as full scale,
    and the ADC takes the largest magnitude in the cycle it digitizes.
    """
    dac_bits: int = 8
    adc_bits: int = 8


def quantize(values, bits: int, full_scale: float) -> np.ndarray:
    """Mid-rise uniform quantizer on [-full_scale, full_scale]; inputs outside clamp."""
    if int(bits) != bits or bits < 1:
        raise OfftError(f"bits must be a positive integer, got {bits!r}")
    if not full_scale > 0:
        raise OfftError(f"full_scale must be > 0, got {full_scale!r}")
    levels = 2 ** int(bits)
    step = 2.0 * full_scale / levels
    idx = np.floor(np.asarray(values, dtype=float) / step)
    idx = np.clip(idx, -levels // 2, levels // 2 - 1)
    return (idx + 0.5) * step


def _quantize_frame(values, bits):
    peak = float(np.max(np.abs(values))) if np.size(values) else 0.0
    if peak == 0.0:
        return np.zeros_like(values)
    # nudge the top so the peak sits inside the last level instead of clamping
    return quantize(values, bits, peak * (1 + 1e-12))


def measure_real(fields, reference_phase: float = 0.0) -> np.ndarray:
    """Homodyne measurement: Re(exp(-i * reference_phase) * field)."""
    return np.real(np.exp(-1j * reference_phase) * np.asarray(fields, dtype=np.complex128))


def complex_readout(plan: NetworkPlan, x, quant: Quantization | None = None,
                    counter: PassCounter | None = None, backend=None) -> np.ndarray:
    """Complex network output recovered from two real-valued cycles.

    Cycle one measures Re(y) for input x.  Cycle two sends i*x and measures
    Re(i*y) = -Im(y), so y = cycle1 - i*cycle2.  ``x`` may hold one input per
    column.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != plan.n or x.ndim > 2:
        raise OfftError(f"input length {x.shape[0]} does not match plan n={plan.n}")
    if quant is not None:
        x = _dac(x, quant.dac_bits)
    direct = measure_real(propagate(plan, x, backend=backend), 0.0)
    rotated = measure_real(propagate(plan, 1j * x, backend=backend), 0.0)
    if quant is not None:
        direct = _adc(direct, quant.adc_bits)
        rotated = _adc(rotated, quant.adc_bits)
    if counter is not None:
        frames = 1 if x.ndim == 1 else x.shape[1]
        counter.add(2 * frames, frames)
    return direct - 1j * rotated


def _per_column(values, fn):
    if values.ndim == 1:
        return fn(values)
    return np.stack([fn(values[:, j]) for j in range(values.shape[1])], axis=1)


def _dac(x, bits):
    # in-phase and quadrature DACs range independently; an all-zero channel stays zero
    return _per_column(x, lambda v: _quantize_frame(v.real, bits) + 1j * _quantize_frame(v.imag, bits))


def _adc(samples, bits):
    return _per_column(samples, lambda v: _quantize_frame(v, bits))


@lru_cache(maxsize=64)
def _canonical_match(plan: NetworkPlan):
    m = match_to_dft(transfer_matrix(plan), dft_oracle(plan.n, "unitary"))
    if m.residual > 1e-9:
        raise OfftError(f"plan is not DFT-equivalent (residual {m.residual:.3g})")
    return m


def _check_square(plan, a, what):
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (plan.n, plan.n):
        raise OfftError(f"{what} has shape {a.shape}, plan needs {(plan.n, plan.n)}")
    return a


def _transform_columns(plan, a, quant, counter, backend):
    # one two-cycle readout per column, then undo the plan's port order and signs
    y = complex_readout(plan, a, quant=quant, counter=counter, backend=backend)
    return _canonical_match(plan).canonicalize(y)


def fft2d(plan: NetworkPlan, image, quant: Quantization | None = None,
          counter: PassCounter | None = None, backend=None) -> np.ndarray:
    """Unitary 2D DFT in natural order using 2n one-dimensional network passes."""
    image = _check_square(plan, image, "image")
    rows = _transform_columns(plan, image.T, quant, counter, backend).T
    return _transform_columns(plan, rows, quant, counter, backend)


def ifft2d(plan: NetworkPlan, spectrum, quant: Quantization | None = None,
           counter: PassCounter | None = None, backend=None) -> np.ndarray:
    """Inverse of :func:`fft2d` as conj(fft2d(conj(spectrum)))."""
    spectrum = _check_square(plan, spectrum, "spectrum")
    return np.conj(fft2d(plan, np.conj(spectrum), quant=quant, counter=counter, backend=backend))


def kernel_spectrum(kernel) -> np.ndarray:
    """Unitary 2D DFT of a kernel computed digitally, for weights known ahead of time."""
    kernel = np.asarray(kernel, dtype=np.complex128)
    f = dft_oracle(kernel.shape[0], "unitary")
    return f @ kernel @ f.T


def convolve(plan: NetworkPlan, image, kernel, quant: Quantization | None = None,
             counter: PassCounter | None = None, backend=None,
             precomputed_kernel: bool = False) -> np.ndarray:
    """Circular 2D convolution through the network.

    The unitary transforms carry a 1/n each way, so the product is scaled by n
    to make a delta kernel the identity.  With ``precomputed_kernel`` the
    kernel spectrum comes from :func:`kernel_spectrum` instead of the network.
    """
    image = _check_square(plan, image, "image")
    kernel = _check_square(plan, kernel, "kernel")
    if precomputed_kernel:
        k_spec = kernel_spectrum(kernel)
    else:
        k_spec = fft2d(plan, kernel, quant, counter, backend)
    spec = fft2d(plan, image, quant, counter, backend) * k_spec
    return plan.n * ifft2d(plan, spec, quant, counter, backend)


def cnn_conv_layer(plan: NetworkPlan, inputs, kernels, bias=None, activation="identity",
                   quant: Quantization | None = None, backend=None) -> list[np.ndarray]:
    """Forward pass of a convolution layer with circular padding.

    ``kernels[o][c]`` maps input channel c to output map o.  Channel sums are
    taken in the spectral domain, so each output map costs one inverse
    transform.
    """
    if activation not in ("identity", "relu"):
        raise OfftError(f"unknown activation {activation!r}")
    inputs = [_check_square(plan, x, "input") for x in inputs]
    if len(kernels) == 0:
        raise OfftError("need at least one output kernel")
    bias = np.zeros(len(kernels)) if bias is None else np.asarray(bias, dtype=float)
    if bias.shape != (len(kernels),):
        raise OfftError(f"bias has shape {bias.shape}, expected ({len(kernels)},)")

    in_spec = [fft2d(plan, x, quant, backend=backend) for x in inputs]
    outputs = []
    for o, per_channel in enumerate(kernels):
        if len(per_channel) != len(inputs):
            raise OfftError(f"kernel {o} has {len(per_channel)} channels, inputs have {len(inputs)}")
        acc = np.zeros((plan.n, plan.n), dtype=np.complex128)
        for c, k in enumerate(per_channel):
            acc += in_spec[c] * fft2d(plan, _check_square(plan, k, "kernel"), quant, backend=backend)
        out = plan.n * ifft2d(plan, acc, quant, backend=backend) + bias[o]
        if activation == "relu":
            out = np.maximum(out.real, 0.0) + 0j
        outputs.append(out)
    return outputs


def frames_per_convolution(n: int) -> int:
    """Network frames charged per convolution.

    One forward and one inverse 2D transform of 2n passes each, two readout
    cycles per pass.  The kernel spectrum and the product are charged to
    electronics at no photonic time.
    """
    return 8 * n


def conv_rate(mode, n: int, dac_rate: float, frames: int | None = None) -> float:
    """Convolutions per second.

    Parallel mode pushes one frame per DAC sample period.  The serial mode
    clocks a frame through one modulator, n sample periods per frame.
    """
    if not dac_rate > 0:
        raise OfftError(f"dac_rate must be > 0, got {dac_rate!r}")
    log2_int(n)
    frames = frames_per_convolution(n) if frames is None else frames
    per_frame = 1 if _mode(mode) == PARALLEL else n
    return dac_rate / (frames * per_frame)


def serial_fill_latency(n: int, dac_rate: float) -> float:
    """Time for the first sample to clear the longest delay path, (n - 1) periods."""
    return (n - 1) / dac_rate


__all__ = [
    "PARALLEL", "SERIAL", "PassCounter", "Quantization", "quantize", "measure_real",
    "complex_readout", "fft2d", "ifft2d", "kernel_spectrum", "convolve", "cnn_conv_layer",
    "frames_per_convolution", "conv_rate", "serial_fill_latency",
]

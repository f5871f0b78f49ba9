"""Analytical power, area and figure-of-merit model: OFFT engines against a GPU.

The serial architecture's laser term grows as 10**(c*n*log2(n)/10) and leaves
double range well before n = 1024, so powers and figures of merit are carried
as ``mpmath.mpf`` values (53-bit mantissa, unbounded exponent).  Rates and
areas stay plain floats.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import mpmath

from .conv import conv_rate
from .core import OfftError, is_power_of_two, log2_int
from .photonics import (PARALLEL, SERIAL, DetectorSpec, DETECTOR_PRESETS, _mode, chip_area,
                        parallel_area, photodiode_power, required_optical_power)

GPU = "gpu"
CONFIGS = (SERIAL, PARALLEL, GPU)
CSV_HEADER = ("config", "n", "conv_rate_hz", "power_w", "area_m2", "fom")


@dataclass(frozen=True)
class ConverterSpec:
    sample_rate: float
    power: float

    def __post_init__(self):
        if not (self.sample_rate > 0 and self.power > 0):
            raise OfftError("converter sample_rate and power must be > 0")


@dataclass(frozen=True)
class GpuSpec:
    fft_flops: float
    power: float
    area: float

    def __post_init__(self):
        if not (self.fft_flops > 0 and self.power > 0 and self.area > 0):
            raise OfftError("gpu fft_flops, power and area must be > 0")


@dataclass(frozen=True)
class PhotonicPowerPreset:
    name: str
    power_at_64: float
    scaling_exponent: float = 1.0

    def __post_init__(self):
        if not self.power_at_64 > 0:
            raise OfftError("power_at_64 must be > 0")

    def power(self, n: int) -> float:
        return self.power_at_64 * (n / 64) ** self.scaling_exponent


# fastest published converters: 8-bit 100 GSa/s DAC, 56 GSa/s ADC
DAC_DEFAULT = ConverterSpec(sample_rate=100e9, power=2.5)
ADC_DEFAULT = ConverterSpec(sample_rate=56e9, power=2.0)
# P100 PCIe: FFT rate from the datasheet, 250 W board power, 610 mm^2 die
GPU_DEFAULT = GpuSpec(fft_flops=1.6e12, power=250.0, area=610e-6)

PHOTONIC_PRESETS = {
    "foundry": PhotonicPowerPreset("foundry", 146.0),
    "nanophotonic": PhotonicPowerPreset("nanophotonic", 0.29),
}


def flops_per_fft(n: int) -> int:
    """5 n log2(n): 2 n log2(n) multiplications plus 3 n log2(n) additions."""
    return 5 * n * log2_int(n)


def fft_flop_split(n: int) -> tuple[int, int]:
    bits = log2_int(n)
    return 2 * n * bits, 3 * n * bits


def flops_per_conv(n: int) -> int:
    """Forward and inverse 2D FFT (2n 1D FFTs each) plus the n^2 kernel product."""
    return 2 * (2 * n) * flops_per_fft(n) + n * n


def gpu_conv_rate(n: int, gpu: GpuSpec) -> float:
    return gpu.fft_flops / flops_per_conv(n)


def offt_power(n: int, mode, dac: ConverterSpec, adc: ConverterSpec,
               preset: PhotonicPowerPreset, diode_power: float) -> float:
    """Converters, photonics and photodiodes; the serial laser term is separate.

    The serial architecture needs one DAC, the parallel one n; both sample n
    outputs with n ADCs.
    """
    log2_int(n)
    dacs = 1 if _mode(mode) == SERIAL else n
    return dacs * dac.power + n * adc.power + preset.power(n) + n * diode_power


def laser_power(n: int, required_power: float, coeff_db: float = 1.0):
    """Optical power to keep every output at ``required_power`` through the serial delay loss.

    The loss grows by ``coeff_db`` per unit of n*log2(n).
    """
    loss_db = coeff_db * n * log2_int(n)
    return n * mpmath.mpf(required_power) * mpmath.power(10, mpmath.mpf(loss_db) / 10)


def nanophotonic_ratio(foundry: PhotonicPowerPreset, nano: PhotonicPowerPreset) -> float:
    return foundry.power_at_64 / nano.power_at_64


def fom(rate, power, area):
    """Convolutions per second per watt per square metre."""
    if not power > 0 or not area > 0:
        raise OfftError("power and area must be > 0")
    return rate / (power * area)


@dataclass(frozen=True)
class FomPoint:
    config: str
    n: int
    conv_rate_hz: float
    power_w: mpmath.mpf
    area_m2: float
    fom: mpmath.mpf


@dataclass
class SweepConfig:
    dac: ConverterSpec = DAC_DEFAULT
    adc: ConverterSpec = ADC_DEFAULT
    gpu: GpuSpec = GPU_DEFAULT
    photonic: PhotonicPowerPreset = PHOTONIC_PRESETS["foundry"]
    detector: DetectorSpec = DETECTOR_PRESETS["constant"]
    # optical power per detector assumed for the diode dissipation
    detector_optical_power: float = 250e-6
    # resolution the serial laser must sustain at the detectors
    target_bits: int = 8
    loss_coeff_db: float = 1.0
    # serial: one delay-sample of spiral (~0.7 mm of Si wire at 100 GSa/s) x 7 um pitch / 2
    serial_unit_area: float = 2.5e-9
    # parallel: one 7 um waveguide pitch squared
    parallel_unit_area: float = 4.9e-11
    frames_per_conv: int | None = None

    def diode_power(self) -> float:
        return photodiode_power(self.detector, self.detector_optical_power)

    def required_power(self) -> float:
        return required_optical_power(self.target_bits, self.detector, self.adc.sample_rate)

    def to_dict(self) -> dict:
        return asdict(self)


def fom_point(config: str, n: int, cfg: SweepConfig) -> FomPoint:
    if config == GPU:
        rate = gpu_conv_rate(n, cfg.gpu)
        power = mpmath.mpf(cfg.gpu.power)
        area = cfg.gpu.area
    else:
        mode = _mode(config)
        frames = None
        if cfg.frames_per_conv is not None:
            frames = cfg.frames_per_conv
        rate = conv_rate(mode, n, cfg.dac.sample_rate, frames)
        power = mpmath.mpf(offt_power(n, mode, cfg.dac, cfg.adc, cfg.photonic, cfg.diode_power()))
        if mode == SERIAL:
            power += laser_power(n, cfg.required_power(), cfg.loss_coeff_db)
            area = chip_area(n, cfg.serial_unit_area)
        else:
            area = parallel_area(n, cfg.parallel_unit_area)
    return FomPoint(config, n, rate, power, area, fom(mpmath.mpf(rate), power, mpmath.mpf(area)))


@dataclass(frozen=True)
class Crossover:
    """Where a photonic curve first drops below the GPU curve.

    ``index``/``n_below`` name the first sweep point below; ``n_interp`` is
    the log-log interpolated crossing between it and the previous point.
    """
    config: str
    index: int
    n_below: int
    n_interp: float


@dataclass
class SweepResult:
    n_range: list
    curves: dict
    crossovers: dict
    config: SweepConfig = field(repr=False, default=None)

    def all_points(self):
        return [p for c in CONFIGS for p in self.curves[c]]

    def to_csv(self) -> str:
        return points_to_csv(self.all_points())

    def report(self) -> dict:
        return {
            "n_range": list(self.n_range),
            "crossovers": {
                k: (None if c is None else {"index": c.index, "n_below": c.n_below,
                                            "n_interp": c.n_interp})
                for k, c in self.crossovers.items()
            },
            "presets": _jsonable(self.config.to_dict()) if self.config else None,
        }

    def report_json(self) -> str:
        return json.dumps(self.report(), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


def find_crossover(photonic: list, gpu: list) -> Crossover | None:
    for i, (p, g) in enumerate(zip(photonic, gpu)):
        if p.fom < g.fom:
            if i == 0:
                return Crossover(p.config, 0, p.n, float(p.n))
            prev_p, prev_g = photonic[i - 1], gpu[i - 1]
            d0 = mpmath.log10(prev_p.fom / prev_g.fom)
            d1 = mpmath.log10(p.fom / g.fom)
            frac = d0 / (d0 - d1)
            log_n = math.log10(prev_p.n) + float(frac) * (math.log10(p.n) - math.log10(prev_p.n))
            return Crossover(p.config, i, p.n, 10 ** log_n)
    return None


def fom_sweep(n_range, cfg: SweepConfig | None = None) -> SweepResult:
    """Serial, parallel and GPU figure of merit over ascending powers of two."""
    cfg = cfg or SweepConfig()
    n_range = [int(n) for n in n_range]
    if not n_range:
        raise OfftError("empty n range")
    if any(not is_power_of_two(n) or n < 2 for n in n_range):
        raise OfftError(f"n range must hold powers of two >= 2, got {n_range}")
    if any(b <= a for a, b in zip(n_range, n_range[1:])):
        raise OfftError("n range must be strictly ascending")
    curves = {c: [fom_point(c, n, cfg) for n in n_range] for c in CONFIGS}
    crossovers = {c: find_crossover(curves[c], curves[GPU]) for c in (SERIAL, PARALLEL)}
    return SweepResult(n_range, curves, crossovers, cfg)


def scaling_law(law: str, n: int, coeff_db: float = 1.0):
    """Asymptotic figure-of-merit law, up to a constant."""
    bits = log2_int(n)
    if law == SERIAL:
        return 1 / (mpmath.mpf(n) ** 4 * bits * mpmath.power(10, mpmath.mpf(coeff_db) * n * bits / 10))
    if law == PARALLEL:
        return 1 / (mpmath.mpf(n) ** 4 * bits)
    if law == GPU:
        return 1 / (mpmath.mpf(n) ** 2 * bits)
    raise OfftError(f"unknown law {law!r}")


def scaling_residuals(points, law: str, coeff_db: float = 1.0) -> list[float]:
    """|model ratio / law ratio - 1| for each consecutive pair of points."""
    if len(points) < 3:
        raise OfftError(f"scaling check needs at least 3 points, got {len(points)}")
    out = []
    for a, b in zip(points, points[1:]):
        model = b.fom / a.fom
        expect = scaling_law(law, b.n, coeff_db) / scaling_law(law, a.n, coeff_db)
        out.append(float(abs(model / expect - 1)))
    return out


def scaling_check(points, law: str, coeff_db: float = 1.0) -> float:
    return max(scaling_residuals(points, law, coeff_db))


def _fmt(value) -> str:
    if isinstance(value, mpmath.mpf):
        # 17 significant digits pin down a 53-bit mantissa exactly
        return mpmath.nstr(value, 17, strip_zeros=False, min_fixed=1, max_fixed=0)
    return repr(value)


def points_to_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in points:
        w.writerow([p.config, p.n, _fmt(p.conv_rate_hz), _fmt(p.power_w), _fmt(p.area_m2), _fmt(p.fom)])
    return buf.getvalue()


def points_from_csv(text: str) -> list[FomPoint]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise OfftError(f"unexpected CSV header {rows[0] if rows else None}")
    return [FomPoint(r[0], int(r[1]), float(r[2]), mpmath.mpf(r[3]), float(r[4]), mpmath.mpf(r[5]))
            for r in rows[1:]]

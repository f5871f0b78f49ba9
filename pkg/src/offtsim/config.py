"""Run configuration: one YAML document holding every model constant.

Keys not listed in :data:`DEFAULTS` are rejected.  Nested sections merge
key by key over the defaults, so a file only needs the values it changes.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

import yaml

from .core import MAX_POINTS, CouplerConvention, is_power_of_two
from .perf import ConverterSpec, GpuSpec, PhotonicPowerPreset, SweepConfig
from .photonics import DETECTOR_PRESETS, LOSS_PRESETS, PARALLEL, SERIAL, DetectorSpec, LossBudget

DEFAULTS = {
    "n": 8,
    "convention": "standard",
    "mode": "parallel",
    "seed": 0,
    "sigma": 0.0,
    "bits": 8,
    "loss_preset": "epixfab-fig5",
    "detector_preset": "constant",
    "photonic_preset": "foundry",
    "verify_max_n": 64,
    "calibration_threshold": 1.0e-3,
    "dac": {"sample_rate": 100.0e9, "power": 2.5},
    "adc": {"sample_rate": 56.0e9, "power": 2.0},
    "gpu": {"fft_flops": 1.6e12, "power": 250.0, "area": 610.0e-6},
    "photonic_presets": {
        "foundry": {"power_at_64": 146.0, "scaling_exponent": 1.0},
        "nanophotonic": {"power_at_64": 0.29, "scaling_exponent": 1.0},
    },
    "detector_optical_power": 250.0e-6,
    "target_bits": 8,
    "loss_coeff_db": 1.0,
    "serial_unit_area": 2.5e-9,
    "parallel_unit_area": 4.9e-11,
    "frames_per_conv": None,
    "out": None,
}

# sections whose keys are free-form names
_OPEN_SECTIONS = {"photonic_presets"}


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"config field {field!r}: {message}")
        self.field = field


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base and path.rstrip(".") not in _OPEN_SECTIONS:
            raise ConfigError(where, "unknown key")
        if isinstance(base.get(key), dict):
            if not isinstance(value, dict):
                raise ConfigError(where, "expected a mapping")
            out[key] = _merge(base[key], value, where + ".") if key not in _OPEN_SECTIONS \
                else {**base[key], **value}
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class RunConfig:
    raw: dict

    def __getattr__(self, name):
        try:
            return self.raw[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def loss_budget(self) -> LossBudget:
        return LOSS_PRESETS[self.raw["loss_preset"]]

    @property
    def detector(self) -> DetectorSpec:
        return DETECTOR_PRESETS[self.raw["detector_preset"]]

    def photonic(self, name=None) -> PhotonicPowerPreset:
        name = name or self.raw["photonic_preset"]
        return PhotonicPowerPreset(name, **self.raw["photonic_presets"][name])

    def sweep_config(self) -> SweepConfig:
        r = self.raw
        return SweepConfig(
            dac=ConverterSpec(**r["dac"]),
            adc=ConverterSpec(**r["adc"]),
            gpu=GpuSpec(**r["gpu"]),
            photonic=self.photonic(),
            detector=self.detector,
            detector_optical_power=r["detector_optical_power"],
            target_bits=r["target_bits"],
            loss_coeff_db=r["loss_coeff_db"],
            serial_unit_area=r["serial_unit_area"],
            parallel_unit_area=r["parallel_unit_area"],
            frames_per_conv=r["frames_per_conv"],
        )


def _number(raw, key, minimum=None, strict=False, integer=False):
    value = raw[key]
    if isinstance(value, str):
        # YAML 1.1 reads "1e-3" (no dot) as a string
        try:
            value = raw[key] = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if minimum is not None and (value <= minimum if strict else value < minimum):
        raise ConfigError(key, f"must be {'>' if strict else '>='} {minimum}, got {value!r}")


def validate(raw: dict) -> RunConfig:
    n = raw["n"]
    if isinstance(n, bool) or not isinstance(n, int) or not is_power_of_two(n) or not 2 <= n <= MAX_POINTS:
        raise ConfigError("n", f"must be a power of two in [2, {MAX_POINTS}], got {n!r}")
    vmax = raw["verify_max_n"]
    if isinstance(vmax, bool) or not isinstance(vmax, int) or not is_power_of_two(vmax) or vmax < 2:
        raise ConfigError("verify_max_n", f"must be a power of two >= 2, got {vmax!r}")
    try:
        CouplerConvention(raw["convention"])
    except ValueError:
        raise ConfigError("convention", f"must be one of {[c.value for c in CouplerConvention]}") from None
    if raw["mode"] not in (SERIAL, PARALLEL):
        raise ConfigError("mode", f"must be serial or parallel, got {raw['mode']!r}")
    for key, table in (("loss_preset", LOSS_PRESETS), ("detector_preset", DETECTOR_PRESETS),
                       ("photonic_preset", raw["photonic_presets"])):
        if raw[key] not in table:
            raise ConfigError(key, f"unknown preset {raw[key]!r}; known: {sorted(table)}")
    _number(raw, "seed", integer=True)
    _number(raw, "sigma", 0.0)
    _number(raw, "bits", 1, integer=True)
    _number(raw, "target_bits", 1, integer=True)
    _number(raw, "calibration_threshold", 0.0, strict=True)
    for key in ("detector_optical_power", "serial_unit_area", "parallel_unit_area"):
        _number(raw, key, 0.0, strict=True)
    _number(raw, "loss_coeff_db", 0.0)
    if raw["frames_per_conv"] is not None:
        _number(raw, "frames_per_conv", 1, integer=True)
    for section, keys in (("dac", ("sample_rate", "power")), ("adc", ("sample_rate", "power")),
                          ("gpu", ("fft_flops", "power", "area"))):
        for key in keys:
            try:
                _number(raw[section], key, 0.0, strict=True)
            except ConfigError as exc:
                raise ConfigError(f"{section}.{key}", str(exc).split(": ", 1)[1]) from None
    for name, preset in raw["photonic_presets"].items():
        if not isinstance(preset, dict) or set(preset) - {"power_at_64", "scaling_exponent"}:
            raise ConfigError(f"photonic_presets.{name}", "expects power_at_64 and scaling_exponent")
        try:
            _number(preset, "power_at_64", 0.0, strict=True)
        except (ConfigError, KeyError):
            raise ConfigError(f"photonic_presets.{name}.power_at_64", "must be a number > 0") from None
    return RunConfig(raw)


def load_config(path=None, overrides=None) -> RunConfig:
    """Defaults, then the YAML file at ``path``, then ``overrides``."""
    raw = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ConfigError("--config", f"invalid YAML: {exc}") from None
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise ConfigError("--config", "top level must be a mapping")
        raw = _merge(raw, doc)
    if overrides:
        raw = _merge(raw, overrides)
    return validate(raw)


def dump_defaults() -> str:
    return yaml.safe_dump(DEFAULTS, sort_keys=False)

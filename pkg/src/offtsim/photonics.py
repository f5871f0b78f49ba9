"""Physical resources and impairments of an OFFT chip.

Spiral delay geometry and area, insertion-loss budgets, per-arm phase errors
with heater calibration, and shot-noise limits at the detectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .core import NetworkPlan, OfftError, _run, is_power_of_two, log2_int

ELECTRON_CHARGE = 1.602176634e-19
TWO_PI = 2.0 * np.pi

SERIAL = "serial"
PARALLEL = "parallel"


def _mode(mode) -> str:
    mode = str(getattr(mode, "value", mode)).lower()
    if mode not in (SERIAL, PARALLEL):
        raise OfftError(f"unknown architecture mode {mode!r}")
    return mode


@dataclass(frozen=True)
class LossBudget:
    grating_db: float = 0.0
    splitter_db: float = 0.0
    coupler_db: float = 0.0
    modulator_db: float = 0.0
    spiral_base_db: float = 0.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value >= 0.0:
                raise OfftError(f"{name} must be >= 0, got {value}")


# imec ePIXfab component losses
LOSS_PRESETS = {
    "epixfab-fig5": LossBudget(grating_db=4.0, splitter_db=0.5, coupler_db=0.991,
                               modulator_db=3.49, spiral_base_db=0.686),
    "ideal": LossBudget(),
}


def loss_preset(name: str) -> LossBudget:
    try:
        return LOSS_PRESETS[name]
    except KeyError:
        raise OfftError(f"unknown loss preset {name!r}; known: {sorted(LOSS_PRESETS)}") from None


@dataclass(frozen=True)
class SpiralSpec:
    stage: int
    relative_length: float
    count: int

    @property
    def total_length(self) -> float:
        return self.relative_length * self.count


def spiral_layout(n: int) -> list[SpiralSpec]:
    """Delay spirals of the serial architecture.

    Stage k holds 2**k spirals, each delaying n / 2**(k+1) sample periods, so
    every stage has the same total spiral length n/2.
    """
    if not is_power_of_two(n) or n < 2:
        raise OfftError(f"n must be a power of two >= 2, got {n!r}")
    return [SpiralSpec(stage=k, relative_length=(n / 2) * 0.5 ** k, count=2 ** k)
            for k in range(log2_int(n))]


def chip_area(n: int, unit_area: float) -> float:
    """Spiral-dominated serial chip area, ``unit_area * n * log2(n)``."""
    return unit_area * n * log2_int(n)


def parallel_area(n: int, unit_area: float) -> float:
    """Parallel chip area, ``unit_area * n**2 * log2(n)``.

    No delay lines; each of the log2(n) butterfly stages is laid out on a
    square footprint n waveguide pitches on a side so that the widest span
    can be routed.  ``unit_area`` is one pitch squared.
    """
    return unit_area * n * n * log2_int(n)


def path_loss_db(plan, budget: LossBudget, mode=PARALLEL) -> float:
    """Insertion loss of one input-to-output path in dB.

    In and out grating couplers, one modulator, one coupler per stage, and in
    the serial mode every spiral stage along the path (one spiral unit of
    loss per sample period of delay).
    """
    n = plan.n if isinstance(plan, NetworkPlan) else int(plan)
    loss = 2 * budget.grating_db + budget.modulator_db + log2_int(n) * budget.coupler_db
    if _mode(mode) == SERIAL:
        loss += sum(budget.spiral_base_db * s.relative_length for s in spiral_layout(n))
    return loss


def apply_loss(fields, loss_db):
    loss_db = np.asarray(loss_db, dtype=float)
    if np.any(loss_db < 0):
        raise OfftError("loss must be >= 0 dB")
    return np.asarray(fields, dtype=np.complex128) * 10.0 ** (-loss_db / 20.0)


def inject_phase_errors(plan: NetworkPlan, sigma: float, seed: int) -> np.ndarray:
    """Independent N(0, sigma^2) phase offsets, one per tunable arm."""
    if sigma < 0:
        raise OfftError(f"sigma must be >= 0, got {sigma}")
    return np.random.default_rng(seed).normal(0.0, sigma, plan.n_arms)


def _check_arms(plan, values, what):
    values = np.zeros(plan.n_arms) if values is None else np.asarray(values, dtype=float)
    if values.shape != (plan.n_arms,):
        raise OfftError(f"{what} has shape {values.shape}, plan has {plan.n_arms} arms")
    if not np.all(np.isfinite(values)):
        raise OfftError(f"{what} must be finite")
    return values


def impaired_transfer_matrix(plan, errors=None, heaters=None, backend=None) -> np.ndarray:
    """Lossless transfer matrix with extra phase (error + heater) on every arm."""
    arm = _check_arms(plan, errors, "errors") + _check_arms(plan, heaters, "heaters")
    return _run(plan, np.eye(plan.n, dtype=np.complex128), arm_phases=arm, backend=backend)


def propagate_impaired(plan, errors, heaters, budget: LossBudget, mode, x, backend=None):
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != plan.n or x.ndim > 2:
        raise OfftError(f"input length {x.shape[0]} does not match plan n={plan.n}")
    arm = _check_arms(plan, errors, "errors") + _check_arms(plan, heaters, "heaters")
    cols = x[:, None] if x.ndim == 1 else x
    y = _run(plan, cols, arm_phases=arm, backend=backend)
    y = apply_loss(y, path_loss_db(plan, budget, mode))
    return y[:, 0] if x.ndim == 1 else y


@dataclass
class CalibrationResult:
    heaters: np.ndarray
    residual: float
    initial_residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def calibrate(plan, errors, target=None, tol=1e-6, max_updates=None, backend=None):
    """Find heater phases that undo the arm errors.

    Cyclic coordinate descent over the arms.  The transfer matrix is affine in
    exp(i*phase) of any single arm, so two evaluations give the exact
    one-dimensional objective; it is minimized by bounded Brent search
    around the best point of an 8-point scan of the full turn.  ``iterations`` counts
    single-arm updates; it stops at Frobenius residual < ``tol`` or after
    ``max_updates`` (default 200 per arm).
    """
    errors = _check_arms(plan, errors, "errors")
    if target is None:
        target = impaired_transfer_matrix(plan, backend=backend)
    target = np.asarray(target, dtype=np.complex128)
    if target.shape != (plan.n, plan.n):
        raise OfftError(f"target has shape {target.shape}, expected {(plan.n, plan.n)}")
    if max_updates is None:
        max_updates = 200 * plan.n_arms

    heaters = np.zeros(plan.n_arms)
    t = impaired_transfer_matrix(plan, errors, heaters, backend=backend)
    residual = initial = float(np.linalg.norm(t - target))
    history = [residual]
    updates = 0
    grid = np.linspace(-np.pi, np.pi, 8, endpoint=False)

    while residual >= tol and updates < max_updates:
        sweep_start = residual
        for j in range(plan.n_arms):
            if residual < tol or updates >= max_updates:
                break
            flipped = heaters.copy()
            flipped[j] += np.pi
            t_flip = impaired_transfer_matrix(plan, errors, flipped, backend=backend)
            base = 0.5 * (t + t_flip) - target
            arm = 0.5 * (t - t_flip)

            def objective(d):
                return float(np.linalg.norm(base + arm * np.exp(1j * d)))

            vals = [objective(d) for d in grid]
            i = int(np.argmin(vals))
            step = grid[1] - grid[0]
            # flat or tied objectives break a strict 3-point bracket; bounds never do
            best = minimize_scalar(objective, bounds=(grid[i] - step, grid[i] + step),
                                   method="bounded", options={"xatol": 1e-12})
            d, val = (best.x, best.fun) if best.fun <= vals[i] else (grid[i], vals[i])
            updates += 1
            if val < residual:
                heaters[j] += d
                t = impaired_transfer_matrix(plan, errors, heaters, backend=backend)
                residual = min(residual, float(np.linalg.norm(t - target)))
            history.append(residual)
        if residual >= sweep_start:
            break

    heaters = np.mod(heaters, TWO_PI)
    return CalibrationResult(heaters=heaters, residual=residual, initial_residual=initial,
                             iterations=updates, converged=residual < tol, history=history)


@dataclass(frozen=True)
class DetectorSpec:
    """Photodiode model.

    ``fixed_power`` overrides the V*R*P dissipation with a constant, as the
    ``constant`` preset does.
    """
    responsivity: float = 0.5
    bias: float = 8.0
    bandwidth: float = 28e9
    fixed_power: float | None = None

    def __post_init__(self):
        if not self.responsivity > 0 or not self.bandwidth > 0:
            raise OfftError("responsivity and bandwidth must be > 0")


DETECTOR_PRESETS = {
    "constant": DetectorSpec(fixed_power=2.4e-6),
    "physical": DetectorSpec(),
}


def detector_bits(optical_power: float, det: DetectorSpec, sample_rate: float) -> int:
    """Shot-noise-limited resolution, floor((SNR_dB - 1.76) / 6.02) bits."""
    if optical_power < 0:
        raise OfftError("optical power must be >= 0")
    if optical_power == 0:
        return 0
    snr = det.responsivity * optical_power / (2 * ELECTRON_CHARGE * sample_rate / 2)
    return max(0, math.floor((10 * math.log10(snr) - 1.76) / 6.02))


def required_optical_power(bits: int, det: DetectorSpec, sample_rate: float) -> float:
    """Smallest optical power at which :func:`detector_bits` reaches ``bits``."""
    snr = 10 ** ((6.02 * bits + 1.76) / 10)
    # nudge up so the floor in detector_bits lands on the boundary
    return snr * 2 * ELECTRON_CHARGE * (sample_rate / 2) / det.responsivity * (1 + 1e-12)


def photodiode_power(det: DetectorSpec, optical_power: float) -> float:
    if optical_power < 0:
        raise OfftError("optical power must be >= 0")
    if det.fixed_power is not None:
        return det.fixed_power
    return det.bias * det.responsivity * optical_power

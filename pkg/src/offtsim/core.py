"""Ideal optical Cooley-Tukey FFT networks built from 2x2 couplers and phase shifters.

A network is planned once (:func:`plan_network`) as a fixed graph of coupler
pairings and twiddle phases, then driven by :func:`propagate`.  Port vectors
and transfer matrices are plain complex numpy arrays.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _backend

MAX_POINTS = 2 ** 16
SQRT1_2 = 1.0 / np.sqrt(2.0)


class OfftError(ValueError):
    """Invalid network size, plan, or dimension mismatch."""


class CouplerConvention(str, enum.Enum):
    PAPER_EQ1 = "paper-eq1"
    STANDARD = "standard"


def _convention(value) -> CouplerConvention:
    try:
        return CouplerConvention(value)
    except ValueError:
        raise OfftError(f"unknown coupler convention {value!r}") from None


def is_power_of_two(n) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def log2_int(n: int) -> int:
    if not is_power_of_two(n):
        raise OfftError(f"n must be a power of two, got {n!r}")
    return int(n).bit_length() - 1


def coupler_2x2(a1, a2, convention=CouplerConvention.PAPER_EQ1):
    """Lossless 2x2 coupler acting on input amplitudes ``(a1, a2)``.

    The ``PAPER_EQ1`` convention sends ``(a1, a2)`` to ``((a2 - a1)/sqrt2, (a1 + a2)/sqrt2)``;
    the standard butterfly to ``((a1 + a2)/sqrt2, (a1 - a2)/sqrt2)``.
    """
    convention = _convention(convention)
    if convention is CouplerConvention.PAPER_EQ1:
        return (a2 - a1) * SQRT1_2, (a1 + a2) * SQRT1_2
    return (a1 + a2) * SQRT1_2, (a1 - a2) * SQRT1_2


def _unit_root(k: int, n: int) -> complex:
    # exp(-2j*pi*k/n), exact on the quarter turns
    k %= n
    if (4 * k) % n == 0:
        return (1.0 + 0j, -1j, -1.0 + 0j, 1j)[4 * k // n]
    ang = -2.0 * np.pi * k / n
    return complex(np.cos(ang), np.sin(ang))


def twiddle(x: int, y: int, n: int) -> complex:
    """Twiddle factor exp(-2*pi*i*x*y/n)."""
    if n == 0:
        raise OfftError("twiddle needs n >= 1")
    if n < 0:
        raise OfftError(f"twiddle needs n >= 1, got {n}")
    return _unit_root(x * y, n)


def bit_reversal_permutation(n: int) -> list[int]:
    bits = log2_int(n)
    out = []
    for i in range(n):
        r = 0
        for b in range(bits):
            if i >> b & 1:
                r |= 1 << (bits - 1 - b)
        out.append(r)
    return out


@dataclass(frozen=True)
class StagePlan:
    """One butterfly layer.

    ``pairings[c]`` is the ``(port_a, port_b)`` pair feeding coupler ``c`` as
    its first and second input.  ``twiddles[p]`` is an integer exponent ``e``:
    port ``p`` is rotated by exp(-2*pi*i*e/n) before the coupler.
    """
    k: int
    pairings: tuple
    twiddles: tuple


@dataclass(frozen=True)
class NetworkPlan:
    n: int
    convention: CouplerConvention
    stages: tuple
    input_permutation: tuple
    output_permutation: tuple

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def n_couplers(self) -> int:
        return sum(len(s.pairings) for s in self.stages)

    @property
    def n_arms(self) -> int:
        # one tunable arm per coupler, on the second input
        return self.n_couplers

    @cached_property
    def kernel_arrays(self):
        """(port_a, port_b, rot_a, rot_b) arrays in the layout the kernels expect."""
        half = self.n // 2
        port_a = np.empty((self.n_stages, half), dtype=np.int64)
        port_b = np.empty_like(port_a)
        rot_a = np.empty((self.n_stages, half), dtype=np.complex128)
        rot_b = np.empty_like(rot_a)
        for s, stage in enumerate(self.stages):
            for c, (a, b) in enumerate(stage.pairings):
                port_a[s, c] = a
                port_b[s, c] = b
                rot_a[s, c] = _unit_root(stage.twiddles[a], self.n)
                rot_b[s, c] = _unit_root(stage.twiddles[b], self.n)
        for arr in (port_a, port_b, rot_a, rot_b):
            arr.setflags(write=False)
        return port_a, port_b, rot_a, rot_b

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "convention": self.convention.value,
            "input_permutation": list(self.input_permutation),
            "output_permutation": list(self.output_permutation),
            "stages": [
                {
                    "k": st.k,
                    "pairings": [list(p) for p in st.pairings],
                    "twiddles": [f"{e}/{self.n}" for e in st.twiddles],
                }
                for st in self.stages
            ],
        }

    def to_json(self) -> str:
        """Stable plan export; twiddles are written as the rational ``e/n`` of a turn."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def plan_network(n: int, convention=CouplerConvention.STANDARD) -> NetworkPlan:
    """Plan a radix-2 decimation-in-time OFFT.

    Inputs are gathered in bit-reversed order.  With the standard coupler the
    outputs land in natural order.  The sign-swapped coupler exchanges its outputs and
    negates one of them; the plan follows each logical value to the port that
    actually holds it and folds carried signs into later twiddles (a sign flip
    is an extra n/2 in the exponent).

    Outputs are always read in physical port order.  ``output_permutation[k]``
    records the port that carries DFT bin k; after the last sign-swapped
    stage half of those ports carry the bin with a sign of -1.
    """
    convention = _convention(convention)
    if not is_power_of_two(n) or not 2 <= n <= MAX_POINTS:
        raise OfftError(f"n must be a power of two in [2, {MAX_POINTS}], got {n!r}")
    bits = log2_int(n)
    swapped = convention is CouplerConvention.PAPER_EQ1

    loc = list(range(n))     # logical index -> physical port
    neg = [False] * n        # physical value = -logical value
    stages = []
    for s in range(bits):
        half = 1 << s
        span = half << 1
        pairings = []
        exps = [0] * n
        for j in range(0, n, span):
            for t in range(half):
                la, lb = j + t, j + t + half
                pa, pb = loc[la], loc[lb]
                pairings.append((pa, pb))
                exps[pa] = (n // 2 if neg[la] else 0) % n
                exps[pb] = (t * (n // span) + (n // 2 if neg[lb] else 0)) % n
                if swapped:
                    loc[la], loc[lb] = pb, pa
                    neg[la], neg[lb] = False, True
                else:
                    neg[la] = neg[lb] = False
        stages.append(StagePlan(k=s, pairings=tuple(pairings), twiddles=tuple(exps)))

    return NetworkPlan(
        n=n,
        convention=convention,
        stages=tuple(stages),
        input_permutation=tuple(bit_reversal_permutation(n)),
        output_permutation=tuple(loc),
    )


def _run(plan, columns, arm_phases=None, backend=None):
    """Propagate a (n, m) block of input columns through the plan."""
    port_a, port_b, rot_a, rot_b = plan.kernel_arrays
    if arm_phases is not None:
        arm = np.asarray(arm_phases, dtype=float).reshape(rot_b.shape)
        rot_b = rot_b * np.exp(1j * arm)
    fields = np.ascontiguousarray(columns[list(plan.input_permutation)], dtype=np.complex128)
    _backend.run_stages(fields, port_a, port_b, rot_a, rot_b,
                        plan.convention is CouplerConvention.PAPER_EQ1, backend=backend)
    return fields


def propagate(plan: NetworkPlan, x, backend=None) -> np.ndarray:
    """Output port amplitudes of the ideal network for input amplitudes ``x``.

    ``x`` may also be a 2-D array whose columns are independent inputs.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != plan.n or x.ndim > 2:
        raise OfftError(f"input length {x.shape[0]} does not match plan n={plan.n}")
    if x.ndim == 1:
        return _run(plan, x[:, None], backend=backend)[:, 0]
    return _run(plan, x, backend=backend)


def transfer_matrix(plan: NetworkPlan, backend=None) -> np.ndarray:
    """Column j is the network response to a unit field at input port j."""
    return _run(plan, np.eye(plan.n, dtype=np.complex128), backend=backend)


def dft_oracle(n: int, normalization: str = "unitary") -> np.ndarray:
    """Brute-force DFT matrix by direct double loop."""
    if n < 1:
        raise OfftError(f"n must be >= 1, got {n}")
    if normalization not in ("unitary", "raw"):
        raise OfftError(f"unknown normalization {normalization!r}")
    scale = 1.0 / np.sqrt(n) if normalization == "unitary" else 1.0
    f = np.empty((n, n), dtype=np.complex128)
    for k in range(n):
        for m in range(n):
            f[k, m] = _unit_root(k * m, n) * scale
    return f


@dataclass(frozen=True)
class DftMatch:
    permutation: tuple
    phases: np.ndarray
    residual: float
    matched: bool

    def canonicalize(self, y: np.ndarray) -> np.ndarray:
        """Map network outputs (rows of ``y``) onto natural, phase-free DFT order."""
        out = np.empty_like(y)
        out[list(self.permutation)] = y / (self.phases[:, None] if y.ndim == 2 else self.phases)
        return out


def match_to_dft(t, f, tol: float = 0.5) -> DftMatch:
    """Greedy row matching of ``t`` against ``f`` up to permutation and unit phases.

    Row k of ``t`` is paired with the unused row of ``f`` of largest
    |<f_j, t_k>| and the phase is taken from that inner product.  ``residual``
    is max_k ||t[k] - c_k f[pi(k)]||_inf; ``matched`` is False when it
    exceeds ``tol``.
    """
    t = np.asarray(t, dtype=np.complex128)
    f = np.asarray(f, dtype=np.complex128)
    if t.shape != f.shape or t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise OfftError(f"shape mismatch: {t.shape} vs {f.shape}")
    n = t.shape[0]
    corr = t.conj() @ f.T          # corr[k, j] = <t_k, f_j>
    mags = np.abs(corr)
    used = np.zeros(n, dtype=bool)
    perm = np.empty(n, dtype=np.int64)
    phases = np.ones(n, dtype=np.complex128)
    for k in range(n):
        row = np.where(used, -1.0, mags[k])
        j = int(np.argmax(row))
        used[j] = True
        perm[k] = j
        c = np.conj(corr[k, j])
        phases[k] = c / abs(c) if abs(c) > 0 else 1.0
    diff = t - phases[:, None] * f[perm]
    residual = float(np.max(np.abs(diff))) if n else 0.0
    return DftMatch(tuple(int(p) for p in perm), phases, residual, residual <= tol)

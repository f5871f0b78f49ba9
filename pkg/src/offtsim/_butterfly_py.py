"""Numpy implementation of the butterfly stage kernel.

Used when the compiled ``_butterfly`` extension is unavailable, and as the
reference the compiled kernel is benchmarked and tested against.
"""
import numpy as np

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def run_stages(fields, port_a, port_b, rot_a, rot_b, swapped):
    """Apply every butterfly stage to ``fields`` in place.

    fields : complex128 array, shape (n, m); each column is one input vector.
    port_a, port_b : int64 arrays, shape (stages, n // 2); coupler port pairs.
    rot_a, rot_b : complex128 arrays, shape (stages, n // 2); phasors applied
        to each coupler input before mixing.
    swapped : bool; use the sign-swapped coupler instead of the textbook one.
    """
    for s in range(port_a.shape[0]):
        pa = port_a[s]
        pb = port_b[s]
        u = fields[pa] * rot_a[s][:, None]
        v = fields[pb] * rot_b[s][:, None]
        if swapped:
            fields[pa] = (v - u) * INV_SQRT2
            fields[pb] = (u + v) * INV_SQRT2
        else:
            fields[pa] = (u + v) * INV_SQRT2
            fields[pb] = (u - v) * INV_SQRT2
    return fields

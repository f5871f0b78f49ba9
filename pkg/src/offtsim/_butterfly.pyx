# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled butterfly stage kernel. Same contract as ``_butterfly_py.run_stages``."""

cdef double INV_SQRT2 = 0.70710678118654752440


def run_stages(double complex[:, ::1] fields,
               const long long[:, ::1] port_a,
               const long long[:, ::1] port_b,
               const double complex[:, ::1] rot_a,
               const double complex[:, ::1] rot_b,
               bint swapped):
    cdef Py_ssize_t n_stages = port_a.shape[0]
    cdef Py_ssize_t n_pairs = port_a.shape[1]
    cdef Py_ssize_t m = fields.shape[1]
    cdef Py_ssize_t s, c, j, pa, pb
    cdef double complex ra, rb, u, v

    with nogil:
        for s in range(n_stages):
            for c in range(n_pairs):
                pa = port_a[s, c]
                pb = port_b[s, c]
                ra = rot_a[s, c]
                rb = rot_b[s, c]
                for j in range(m):
                    u = fields[pa, j] * ra
                    v = fields[pb, j] * rb
                    if swapped:
                        fields[pa, j] = (v - u) * INV_SQRT2
                        fields[pb, j] = (u + v) * INV_SQRT2
                    else:
                        fields[pa, j] = (u + v) * INV_SQRT2
                        fields[pb, j] = (u - v) * INV_SQRT2

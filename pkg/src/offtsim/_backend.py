"""Select the butterfly kernel: compiled extension if built, numpy otherwise.

Set ``OFFTSIM_PURE_PYTHON=1`` to force the numpy kernel.
"""
import os

from . import _butterfly_py

NAME = "python"
_compiled = None

if not os.environ.get("OFFTSIM_PURE_PYTHON"):
    try:
        from . import _butterfly as _compiled
        NAME = "cython"
    except ImportError:
        _compiled = None


def run_stages(fields, port_a, port_b, rot_a, rot_b, swapped, backend=None):
    """Run all stages in place on a C-contiguous complex128 ``fields`` array."""
    use = backend or NAME
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled butterfly kernel is not built")
        _compiled.run_stages(fields, port_a, port_b, rot_a, rot_b, bool(swapped))
    elif use == "python":
        _butterfly_py.run_stages(fields, port_a, port_b, rot_a, rot_b, swapped)
    else:
        raise ValueError(f"unknown backend {use!r}")
    return fields


def available():
    return ["python"] + (["cython"] if _compiled is not None else [])

"""Backend selection for the Jacobi eigensolver kernel.

The compiled Cython module is used when importable; otherwise the
pure-Python twin takes over.  Set UPCR_BACKEND=python or
UPCR_BACKEND=compiled to force a choice (the latter raises if the
extension was not built).
"""
import os

from . import _jacobi_py

try:
    from . import _jacobi_cy
except ImportError:
    _jacobi_cy = None

_BACKENDS = {"python": _jacobi_py}
if _jacobi_cy is not None:
    _BACKENDS["compiled"] = _jacobi_cy

_requested = os.environ.get("UPCR_BACKEND", "auto")
if _requested == "auto":
    _active_name = "compiled" if _jacobi_cy is not None else "python"
elif _requested in _BACKENDS:
    _active_name = _requested
elif _requested == "compiled":
    raise ImportError(
        "UPCR_BACKEND=compiled but the compiled kernel is not built; "
        "reinstall the package with Cython and a C compiler available"
    )
else:
    raise ImportError(f"unknown UPCR_BACKEND value: {_requested!r}")

jacobi_eigh = _BACKENDS[_active_name].jacobi_eigh


def backend_name():
    """Name of the active eigensolver backend: 'compiled' or 'python'."""
    return _active_name


def available_backends():
    """Mapping of backend name to its jacobi_eigh callable."""
    return {name: mod.jacobi_eigh for name, mod in _BACKENDS.items()}

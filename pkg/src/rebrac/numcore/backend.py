"""Kernel backend selection.

The hot kernels (MLP forward/backward, Adam) exist twice: a Cython extension
built at install time and a pure-numpy fallback.  The compiled backend is
picked automatically when importable; set REBRAC_KERNELS=numpy or =cython to
force one (forcing cython raises if the extension is missing).
"""

import contextlib
import os

from . import _kernels_np

_FORCE = os.environ.get("REBRAC_KERNELS", "auto").lower()

if _FORCE not in ("auto", "cython", "numpy"):
    raise ValueError(f"REBRAC_KERNELS must be auto, cython or numpy, got {_FORCE!r}")

_cython_kernels = None
if _FORCE in ("auto", "cython"):
    try:
        from . import _kernels as _cython_kernels
    except ImportError:
        if _FORCE == "cython":
            raise ImportError(
                "REBRAC_KERNELS=cython but the compiled extension is not available; "
                "reinstall the package with a C compiler present"
            )

_BACKENDS = {"numpy": _kernels_np}
if _cython_kernels is not None:
    _BACKENDS["cython"] = _cython_kernels

_active_name = "cython" if _cython_kernels is not None and _FORCE != "numpy" else "numpy"


def active_backend_name():
    return _active_name


def active_backend():
    return _BACKENDS[_active_name]


def get_backend(name):
    """Look up a backend by name; raises KeyError for unavailable backends."""
    return _BACKENDS[name]


def available_backends():
    return tuple(sorted(_BACKENDS))


@contextlib.contextmanager
def use_backend(name):
    """Temporarily make `name` the active backend (mainly for tests/benchmarks)."""
    global _active_name
    if name not in _BACKENDS:
        raise KeyError(f"backend {name!r} not available; have {available_backends()}")
    previous = _active_name
    _active_name = name
    try:
        yield _BACKENDS[name]
    finally:
        _active_name = previous

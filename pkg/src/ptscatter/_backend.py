"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` twin. Callers go through :func:`kernels` so that
:func:`use_backend` takes effect everywhere at once.
"""

from . import _pykernels

_AVAILABLE = {"python": _pykernels}
try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None
else:
    _AVAILABLE["cython"] = _ckernels

_active = _AVAILABLE.get("cython", _pykernels)


def available():
    """Names of importable backends, compiled first."""
    return tuple(sorted(_AVAILABLE, key=lambda n: n != "cython"))


def name():
    """Name of the active backend."""
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def kernels():
    """The active kernel module."""
    return _active


def use_backend(backend):
    """Switch the active backend (``"cython"``, ``"python"`` or ``"auto"``).

    Returns the previous backend name so callers can restore it.
    """
    global _active
    previous = name()
    if backend == "auto":
        _active = _AVAILABLE.get("cython", _pykernels)
    elif backend in _AVAILABLE:
        _active = _AVAILABLE[backend]
    else:
        raise ValueError(f"backend {backend!r} not available; have {available()}")
    return previous


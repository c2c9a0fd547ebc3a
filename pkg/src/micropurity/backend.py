"""Kernel backend selection.

The hot sampling/observable kernels exist twice: a compiled Cython extension
(``micropurity._kernels``) and a pure numpy fallback
(``micropurity._kernels_py``).  At import time the compiled module is
preferred when present; the environment variable ``MICROPURITY_BACKEND``
(``"compiled"`` or ``"python"``) forces a choice, and :func:`use` switches at
runtime (useful for tests and benchmarks).

Both implement identical contracts and agree to floating-point round-off;
within one backend all results are bit-reproducible for fixed seeds.
"""

import importlib
import os

_ENV_VAR = "MICROPURITY_BACKEND"
_MODULES = {
    "compiled": "micropurity._kernels",
    "python": "micropurity._kernels_py",
}

_active_name = None
_active_module = None


def available_backends():
    """Names of the backends importable in this environment."""
    found = []
    for name, modname in _MODULES.items():
        try:
            importlib.import_module(modname)
        except ImportError:
            continue
        found.append(name)
    return tuple(found)


def use(name):
    """Activate a backend by name; returns the previously active name."""
    global _active_name, _active_module
    if name not in _MODULES:
        raise ValueError(f"unknown backend {name!r}; expected one of {sorted(_MODULES)}")
    module = importlib.import_module(_MODULES[name])
    previous = _active_name
    _active_name, _active_module = name, module
    return previous


def _initialize():
    forced = os.environ.get(_ENV_VAR)
    if forced:
        use(forced)
        return
    try:
        use("compiled")
    except ImportError:
        use("python")


def kernels():
    """The active kernel module."""
    if _active_module is None:
        _initialize()
    return _active_module


def backend_name():
    """Name of the active kernel backend (``"compiled"`` or ``"python"``)."""
    if _active_module is None:
        _initialize()
    return _active_name

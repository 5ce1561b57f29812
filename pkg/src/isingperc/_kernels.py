"""Backend selection for the inner loops.

The compiled ``_core`` extension is used when importable; otherwise the
pure-Python ``_fallback``.  Set ``ISINGPERC_BACKEND=python`` to force the
fallback (useful for equivalence tests and benchmarks).
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("ISINGPERC_BACKEND", "").lower() != "python":
    try:
        from . import _core as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback

OK = _fallback.OK
INADMISSIBLE = _fallback.INADMISSIBLE
ORDER_VIOLATION = _fallback.ORDER_VIOLATION


def get(name=None):
    """Return the kernel module by name ('cython' / 'python'), default active."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


def sweeps(*args):
    return _impl.sweeps(*args)


def coupled_sweeps(*args):
    return _impl.coupled_sweeps(*args)


def label(*args):
    return _impl.label(*args)

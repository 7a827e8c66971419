"""Backend selection for the hot loops: compiled extension if importable,
numpy otherwise. NILSAMPLER_PURE=1 forces the numpy path."""
import os

from . import _kernels_py

BACKEND = "numpy"
_impl = _kernels_py

if os.environ.get("NILSAMPLER_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled

        _impl = _compiled
        BACKEND = "cython"
    except ImportError:
        pass


def spread(x, c, G, w, sig2, grid, backend=None):
    impl = _pick(backend)
    impl.spread(x, c, G, w, sig2, grid)


def interp(x, grid, G, w, sig2, out, backend=None):
    impl = _pick(backend)
    impl.interp(x, grid, G, w, sig2, out)


def available() -> list:
    out = ["numpy"]
    try:
        from . import _kernels  # noqa: F401

        out.append("cython")
    except ImportError:
        pass
    return out


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "numpy":
        return _kernels_py
    if backend == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")

"""Kernel backend selection: compiled extension if available, else pure python.

Set RANDBC_BACKEND=python to force the fallback (used by the benchmark and the
backend-equivalence tests).
"""
import os

if os.environ.get("RANDBC_BACKEND", "").lower() == "python":
    from randbc import _pykernels as kernels
else:
    try:
        from randbc import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from randbc import _pykernels as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND_NAME
bessel_jk = kernels.bessel_jk
spherical_jl = kernels.spherical_jl
fd_radial_edge = kernels.fd_radial_edge

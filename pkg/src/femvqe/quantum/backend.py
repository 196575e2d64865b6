"""Kernel backend selection.

The compiled extension is preferred when importable; set FEMVQE_PURE_PYTHON=1
to force the numpy fallback (used by the backend benchmark and as an escape
hatch on platforms without a compiler).
"""

import os

from . import _kernels_py


def _want_pure() -> bool:
    return os.environ.get("FEMVQE_PURE_PYTHON", "").strip().lower() not in ("", "0", "false")


if _want_pure():
    _impl = _kernels_py
    _BACKEND_NAME = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        _BACKEND_NAME = "cython"
    except ImportError:
        _impl = _kernels_py
        _BACKEND_NAME = "python"


def backend_name() -> str:
    """Which kernel implementation is active: 'cython' or 'python'."""
    return _BACKEND_NAME


apply_ry = _impl.apply_ry
apply_rz = _impl.apply_rz
apply_cx = _impl.apply_cx
apply_cz = _impl.apply_cz
apply_crx = _impl.apply_crx
pauli_expectation = _impl.pauli_expectation
probabilities = _impl.probabilities

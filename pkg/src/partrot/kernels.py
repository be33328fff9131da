"""Ansatz kernel selection.

The compiled ``_kernels`` extension is used when importable, otherwise the
numpy fallback.  ``PARTROT_KERNELS=python`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
if os.getenv("PARTROT_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    if _compiled is not None:
        BACKEND = "cython"

if BACKEND == "cython":
    ansatz_unitary = _compiled.ansatz_unitary
    ansatz_jacobian = _compiled.ansatz_jacobian
else:
    ansatz_unitary = _kernels_py.ansatz_unitary
    ansatz_jacobian = _kernels_py.ansatz_jacobian

u3_qubits = _kernels_py.u3_qubits

__all__ = ["BACKEND", "ansatz_unitary", "ansatz_jacobian", "u3_qubits"]

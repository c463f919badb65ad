"""Recurrence-gate kernels: compiled extension when available, numpy otherwise.

Set CONVSQL_KERNELS=python to force the fallback, =cython to require the
compiled backend.
"""

import os

from . import _gates_np

_choice = os.environ.get("CONVSQL_KERNELS", "auto")

if _choice == "python":
    _impl = _gates_np
    BACKEND = "python"
else:
    try:
        from . import _gates_cy as _impl

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _gates_np
        BACKEND = "python"

lstm_gates_forward = _impl.lstm_gates_forward
lstm_gates_backward = _impl.lstm_gates_backward

__all__ = ["BACKEND", "lstm_gates_backward", "lstm_gates_forward"]
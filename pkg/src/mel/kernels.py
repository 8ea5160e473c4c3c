"""Kernel backend selection.

The compiled extension is used when it imports; set MEL_PURE_PYTHON=1 to
force the numpy implementation.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("MEL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend or python_backend
BACKEND = "compiled" if compiled_backend is not None and backend is compiled_backend else "python"

scan_grid = backend.scan_grid
scan_events = backend.scan_events

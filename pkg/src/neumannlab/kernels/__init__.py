"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set NEUMANNLAB_PURE_PY=1 to force the pure-Python backend.
"""

import os

if os.environ.get("NEUMANNLAB_PURE_PY"):
    from . import _ref as _impl

    BACKEND = "python"
else:
    try:
        from . import _fast as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _ref as _impl

        BACKEND = "python"

shift_batch = _impl.shift_batch
ca_batch = _impl.ca_batch

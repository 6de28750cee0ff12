"""Hot-kernel backend selection.

Imports the compiled Cython extension when present, otherwise the NumPy
fallback.  ``SCPBICM_FORCE_PYTHON=1`` forces the fallback (used by the
benchmark and the backend-equivalence tests).
"""

import os

from . import _fallback

if os.environ.get("SCPBICM_FORCE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

bp_decode = _impl.bp_decode
check_syndrome = _impl.check_syndrome
maxlog_demap = _impl.maxlog_demap

__all__ = ["BACKEND", "bp_decode", "check_syndrome", "maxlog_demap", "_fallback"]

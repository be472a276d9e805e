"""Kernel backend selection.

Prefers the compiled extension; falls back to the NumPy implementations when
it is missing or when ``SARML_FORCE_FALLBACK=1`` is set.  Both backends expose
``level_set_sums`` and ``bandlimited_cosine_sum`` with identical contracts.
"""

import os

from . import fallback

if os.environ.get("SARML_FORCE_FALLBACK", "") == "1":
    _impl = fallback
    BACKEND = "fallback"
else:
    try:
        from . import _native as _impl
        BACKEND = "native"
    except ImportError:
        _impl = fallback
        BACKEND = "fallback"

level_set_sums = _impl.level_set_sums
bandlimited_cosine_sum = _impl.bandlimited_cosine_sum

__all__ = ["BACKEND", "bandlimited_cosine_sum", "fallback", "level_set_sums"]

"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded. Set ``GCPR_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _py

BACKEND = "python"
_impl = _py
if os.environ.get("GCPR_BACKEND", "").lower() != "python":
    try:
        from . import _cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _py

profile_rss = _impl.profile_rss
weighted_autocov = _impl.weighted_autocov
sim_moments = _impl.sim_moments
block_stats = _impl.block_stats
intw2 = _impl.intw2

__all__ = ["BACKEND", "profile_rss", "weighted_autocov", "sim_moments", "block_stats", "intw2"]

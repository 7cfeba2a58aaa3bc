"""Kernel selection: compiled extension when available, pure Python otherwise.

Set MOTIFARC_PURE=1 to force the Python lane (used by the benchmark and the
equivalence tests).
"""

import os

if os.environ.get("MOTIFARC_PURE") == "1":
    from . import pyfallback as _impl
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pyfallback as _impl

IMPLEMENTATION = _impl.IMPLEMENTATION
edit_distance = _impl.edit_distance
edit_distance_banded = _impl.edit_distance_banded
prefix_match_cost = _impl.prefix_match_cost
realign = _impl.realign
realign_columns = _impl.realign_columns
consensus_columns = _impl.consensus_columns
cgk_embed_batch = _impl.cgk_embed_batch
align_ops = _impl.align_ops
corrupt_read = _impl.corrupt_read

__all__ = [
    "IMPLEMENTATION",
    "edit_distance",
    "edit_distance_banded",
    "prefix_match_cost",
    "realign",
    "realign_columns",
    "consensus_columns",
    "cgk_embed_batch",
    "align_ops",
    "corrupt_read",
]

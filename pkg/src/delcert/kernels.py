"""Kernel dispatch: compiled edit-distance core with pure-Python fallback.

At import time the compiled extension is preferred; set
``DELCERT_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the equivalence tests).
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from . import _editdp as _py

_cy = None
if os.environ.get("DELCERT_PURE_PYTHON") != "1":
    try:
        from . import _editdp_cy as _cy  # type: ignore[no-redef]
    except ImportError:
        _cy = None

BACKEND = "cython" if _cy is not None else "python"


def _as_ids(seq: Sequence[int]) -> np.ndarray:
    return np.asarray(seq, dtype=np.intc)


if _cy is not None:

    def edit_distance_ids(a, b, allow_del: bool, allow_ins: bool, allow_sub: bool) -> int:
        return _cy.edit_distance_ids(_as_ids(a), _as_ids(b), allow_del, allow_ins, allow_sub)

    def lcs_length_ids(a, b) -> int:
        return _cy.lcs_length_ids(_as_ids(a), _as_ids(b))

else:
    edit_distance_ids = _py.edit_distance_ids
    lcs_length_ids = _py.lcs_length_ids

"""Hot-loop kernels: greedy test selection and kill counting.

Two interchangeable implementations exist. The compiled one
(mutreduce._kernels._core, Cython) is used when it was built; otherwise
the pure numpy fallback takes over. Both must return bit-identical
results; setting MUTREDUCE_PURE=1 forces the fallback (used by the
benchmark and the parity tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import pure as _pure

if os.environ.get("MUTREDUCE_PURE"):
    _core = None
else:
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        _core = None

BACKEND = "compiled" if _core is not None else "pure"


def select_and_count(index, mprime: np.ndarray) -> tuple[np.ndarray, int]:
    """First-killer test selection plus distinct-kill count.

    ``mprime`` holds sorted mutant indices. Returns the ascending array of
    selected test indices (the lowest-rank killer of each killable mutant)
    and the number of distinct mutants of the whole cache those tests kill.
    """
    if _core is not None:
        return _core.select_and_count(
            mprime,
            index.killer_indptr,
            index.killer_tests,
            index.test_indptr,
            index.test_mutants,
            index.n_tests,
            index.n_mutants,
        )
    return _pure.select_and_count(
        mprime,
        index.killer_indptr,
        index.killer_tests,
        index.kill_matrix,
    )

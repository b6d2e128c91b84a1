"""Pure numpy fallback for the reduction kernel.

Must stay observably identical to the compiled kernel: same selected test
indices (ascending), same kill count. The dense kill matrix trades memory
for vectorization; caches in the intended size range (hundreds of tests,
thousands of mutants) stay in the low megabytes.
"""

from __future__ import annotations

import numpy as np


def select_and_count(
    mprime: np.ndarray,
    killer_indptr: np.ndarray,
    killer_tests: np.ndarray,
    kill_matrix: np.ndarray,
) -> tuple[np.ndarray, int]:
    starts = killer_indptr[mprime]
    has_killer = killer_indptr[mprime + 1] > starts
    firsts = killer_tests[starts[has_killer]]
    selected = np.unique(firsts).astype(np.int32, copy=False)
    if selected.size == 0:
        return selected, 0
    killed = int(kill_matrix[selected].any(axis=0).sum())
    return selected, killed

"""Numeric array view of a cache, shared by the strategy VM and objectives.

Index conventions (load-bearing, do not reorder):

* operators are indexed in ascending id order,
* mutants are indexed in ascending id order, so iterating mutant indices
  ascending is the same as the id-ordered processing every tie-break
  rule in the package is defined on,
* tests are indexed in ascending priority_rank order, so a mutant's
  lowest-index killer is its first killer under the test priority.

Killer lists per mutant (CSR: killer_indptr / killer_tests) are sorted by
test index, and the transpose (test_indptr / test_mutants) gives the
mutants each test kills. Both the compiled and the pure kernel consume
these arrays and must return identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .cache import MutationCache


@dataclass(frozen=True, eq=False)
class CacheIndex:
    cache: MutationCache
    op_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    mutant_ids: tuple[str, ...]
    op_generation_cost: np.ndarray
    mutant_exec_cost: np.ndarray
    mutant_operator: np.ndarray
    killer_indptr: np.ndarray
    killer_tests: np.ndarray
    test_indptr: np.ndarray
    test_mutants: np.ndarray
    op_indptr: np.ndarray
    op_mutants: np.ndarray
    op_index: dict[str, int] = field(repr=False)
    test_index: dict[str, int] = field(repr=False)
    mutant_index: dict[str, int] = field(repr=False)

    @property
    def n_operators(self) -> int:
        return len(self.op_ids)

    @property
    def n_tests(self) -> int:
        return len(self.test_ids)

    @property
    def n_mutants(self) -> int:
        return len(self.mutant_ids)

    @property
    def total_cost(self) -> float:
        return self.cache.total_cost

    @property
    def killable_count(self) -> int:
        return self.cache.killable_count

    @cached_property
    def kill_matrix(self) -> np.ndarray:
        """Dense bool matrix [test, mutant]; used by the pure kernel and oracles."""
        matrix = np.zeros((self.n_tests, self.n_mutants), dtype=bool)
        for m in range(self.n_mutants):
            matrix[self.killer_tests[self.killer_indptr[m]:self.killer_indptr[m + 1]], m] = True
        return matrix

    def mutants_of_operators(self, ops: np.ndarray) -> np.ndarray:
        """Sorted mutant indices generated by the given operator indices."""
        if ops.size == 0:
            return np.empty(0, dtype=np.int32)
        parts = [self.op_mutants[self.op_indptr[o]:self.op_indptr[o + 1]] for o in ops]
        return np.sort(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int32)


_memo: dict[int, CacheIndex] = {}


def build_index(cache: MutationCache) -> CacheIndex:
    """Build (or reuse) the numeric view of a cache.

    Memoized by object identity: the cache is immutable and the index holds
    a reference to it, so an identity hit can never be stale.
    """
    if isinstance(cache, CacheIndex):
        return cache
    memoized = _memo.get(id(cache))
    if memoized is not None and memoized.cache is cache:
        return memoized

    ops = sorted(cache.operators, key=lambda o: o.id)
    tests = sorted(cache.tests, key=lambda t: t.priority_rank)
    mutants = sorted(cache.mutants, key=lambda m: m.id)

    op_ids = tuple(o.id for o in ops)
    test_ids = tuple(t.id for t in tests)
    mutant_ids = tuple(m.id for m in mutants)
    op_index = {o: i for i, o in enumerate(op_ids)}
    test_index = {t: i for i, t in enumerate(test_ids)}
    mutant_index = {m: i for i, m in enumerate(mutant_ids)}

    n_m = len(mutants)
    killer_indptr = np.zeros(n_m + 1, dtype=np.int64)
    killer_chunks = []
    for i, m in enumerate(mutants):
        killers = np.sort(np.fromiter(
            (test_index[k] for k in m.killers), dtype=np.int32, count=len(m.killers)))
        killer_chunks.append(killers)
        killer_indptr[i + 1] = killer_indptr[i] + killers.size
    killer_tests = (np.concatenate(killer_chunks) if killer_chunks
                    else np.empty(0, dtype=np.int32)).astype(np.int32, copy=False)

    # Transpose: mutants per test, ascending mutant index within each test.
    n_t = len(tests)
    counts = np.zeros(n_t, dtype=np.int64)
    for t in killer_tests:
        counts[t] += 1
    test_indptr = np.zeros(n_t + 1, dtype=np.int64)
    np.cumsum(counts, out=test_indptr[1:])
    test_mutants = np.empty(killer_tests.size, dtype=np.int32)
    cursor = test_indptr[:-1].copy()
    for m in range(n_m):
        for t in killer_tests[killer_indptr[m]:killer_indptr[m + 1]]:
            test_mutants[cursor[t]] = m
            cursor[t] += 1

    # Mutants per operator, ascending mutant index within each operator.
    mutant_operator = np.fromiter(
        (op_index[m.operator_id] for m in mutants), dtype=np.int32, count=n_m)
    n_o = len(ops)
    op_counts = np.zeros(n_o, dtype=np.int64)
    for o in mutant_operator:
        op_counts[o] += 1
    op_indptr = np.zeros(n_o + 1, dtype=np.int64)
    np.cumsum(op_counts, out=op_indptr[1:])
    op_mutants = np.empty(n_m, dtype=np.int32)
    cursor = op_indptr[:-1].copy()
    for m in range(n_m):
        o = mutant_operator[m]
        op_mutants[cursor[o]] = m
        cursor[o] += 1

    index = CacheIndex(
        cache=cache,
        op_ids=op_ids,
        test_ids=test_ids,
        mutant_ids=mutant_ids,
        op_generation_cost=np.array([o.generation_cost for o in ops], dtype=np.float64),
        mutant_exec_cost=np.array([m.exec_cost for m in mutants], dtype=np.float64),
        mutant_operator=mutant_operator,
        killer_indptr=killer_indptr,
        killer_tests=killer_tests,
        test_indptr=test_indptr,
        test_mutants=test_mutants,
        op_indptr=op_indptr,
        op_mutants=op_mutants,
        op_index=op_index,
        test_index=test_index,
        mutant_index=mutant_index,
    )
    _memo[id(cache)] = index
    return index

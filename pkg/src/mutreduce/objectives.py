"""The two objectives a reduction strategy is judged on.

TIME is the cost of the reduced run relative to the full run: the
operators the strategy executed pay their generation cost, the mutants it
kept pay their execution cost, and the ratio is taken against the cost of
generating and executing everything. SCORE is the mutation score the
reduced mutant set lets the test suite reach, relative to the full run's
score.

The reduced run is replayed against the recorded data: each kept mutant
faces the tests in priority order, so the test that kills it is its
lowest-rank killer. The selected suite T' is the union of those killing
tests, and the reduced-run mutation score counts the mutants of the whole
cache that T' kills. This selector is monotone: growing the mutant set
can only grow T', so SCORE never decreases when mutants are added, and
TIME never decreases because costs are non-negative.

Both objectives live in [0, 1]: SCORE relative to a full suite that kills
every killable mutant, TIME relative to a run that pays for everything.
Stochastic strategies are evaluated as an average over n repetitions:
TIME as the ratio of summed costs, SCORE as the mean of per-repetition
scores (computed as one exact integer ratio).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .cache import MutationCache
from .index import CacheIndex, build_index
from .strategy import ReductionRun, Strategy, execute_indexed


@dataclass(frozen=True)
class TestSelection:
    """T' for a reduced mutant set, plus how many cache mutants it kills."""

    test_ids: tuple[str, ...]
    killed_mutants: int


@dataclass(frozen=True)
class ObjectivePair:
    time: float
    score: float


def _mutant_indices(index: CacheIndex, mutant_ids: Iterable[str]) -> np.ndarray:
    try:
        positions = sorted(index.mutant_index[m] for m in mutant_ids)
    except KeyError as exc:
        raise KeyError(f"unknown mutant id {exc.args[0]!r}") from None
    return np.asarray(positions, dtype=np.int32)


def select_tests(
    m_prime: Iterable[str],
    cache: MutationCache | CacheIndex,
) -> TestSelection:
    """Select the tests a prioritized suite would use to kill m_prime.

    Each killable mutant contributes its smallest-priority_rank killer;
    mutants with no killers contribute nothing. Deterministic and
    idempotent: a pure function of the mutant set.
    """
    index = build_index(cache)
    mprime = _mutant_indices(index, m_prime)
    selected, killed = _kernels.select_and_count(index, mprime)
    return TestSelection(
        test_ids=tuple(index.test_ids[t] for t in selected),
        killed_mutants=killed,
    )


def time_objective(run: ReductionRun, cache: MutationCache | CacheIndex) -> float:
    """Relative cost of the reduced run; 1.0 means as expensive as the full run."""
    index = build_index(cache)
    return run.strategy_cost / index.total_cost


def score_objective(run: ReductionRun, cache: MutationCache | CacheIndex) -> float:
    """Relative mutation score of the reduced run.

    Computed as killed / killable: both the reduced-run score and the
    full-run score share the |M| denominator, so the ratio of the two is
    an exact integer ratio. 0.0 when the cache has no killable mutants.
    """
    index = build_index(cache)
    if index.killable_count == 0:
        return 0.0
    mprime = _mutant_indices(index, run.mutant_ids)
    _, killed = _kernels.select_and_count(index, mprime)
    return killed / index.killable_count


def evaluate_indexed(
    strategy: Strategy,
    index: CacheIndex,
    n: int,
    rng: np.random.Generator,
) -> ObjectivePair:
    """Hot path used by the search loop; see evaluate for the contract."""
    substreams = rng.spawn(n)
    costs = []
    killed_total = 0
    for sub in substreams:
        _, mutant_pool, cost = execute_indexed(strategy, index, sub)
        costs.append(cost)
        _, killed = _kernels.select_and_count(index, mutant_pool)
        killed_total += killed
    time = math.fsum(costs) / math.fsum([index.total_cost] * n)
    if index.killable_count == 0:
        score = 0.0
    else:
        score = killed_total / (n * index.killable_count)
    return ObjectivePair(time=time, score=score)


def evaluate(
    strategy: Strategy,
    cache: MutationCache | CacheIndex,
    n: int = 5,
    *,
    rng: np.random.Generator,
) -> ObjectivePair:
    """Average objectives over n independent repetitions of a strategy.

    Each repetition runs with its own child stream spawned from ``rng``,
    so repetitions are order-independent and the whole evaluation is a
    deterministic function of the generator's seed. TIME is the ratio of
    summed costs; SCORE is the mean of per-repetition relative scores,
    which reduces to total kills / (n * killable).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return evaluate_indexed(strategy, build_index(cache), n, rng)

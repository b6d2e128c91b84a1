import math

import numpy as np
import pytest

from mutreduce.baselines import (BASELINE_KINDS, BaselineSpec, RMS_SWEEP,
                                 ROS_SWEEP, SM_SWEEP, baseline_front,
                                 evaluate_baseline, run_baseline, sweep)
from mutreduce.cache import (MutantRecord, MutationCache, OperatorRecord,
                             TestRecord, synth_cache)
from mutreduce.objectives import ObjectivePair, select_tests
from mutreduce.search import dominates


@pytest.fixture(scope="module")
def bench_cache():
    return synth_cache(6, 100, 25, seed=37, kill_density=0.7, redundancy=0.4)


def yields_cache():
    """Operators A and C yield 5 mutants each, B yields 3."""
    ops = tuple(OperatorRecord(id=o, generation_cost=1.0) for o in "ABC")
    tests = (TestRecord(id="t0", priority_rank=0),)
    mutants = []
    for op, count in (("A", 5), ("B", 3), ("C", 5)):
        for i in range(count):
            mutants.append(MutantRecord(id=f"{op}{i}", operator_id=op,
                                        exec_cost=1.0, killers=("t0",)))
    return MutationCache(operators=ops, tests=tests, mutants=tuple(mutants))


# ===== spec construction and text =====

def test_spec_validation():
    with pytest.raises(ValueError):
        BaselineSpec(kind="RMS")
    with pytest.raises(ValueError):
        BaselineSpec(kind="RMS", percentage=101)
    with pytest.raises(ValueError):
        BaselineSpec(kind="SM", percentage=10)
    with pytest.raises(ValueError):
        BaselineSpec(kind="SM", exclusions=-1)
    with pytest.raises(ValueError):
        BaselineSpec(kind="XXX", percentage=10)


@pytest.mark.parametrize("spec,text", [
    (BaselineSpec(kind="RMS", percentage=30), "Baseline RMS random 30%"),
    (BaselineSpec(kind="ROS", percentage=90), "Baseline ROS random 90%"),
    (BaselineSpec(kind="SM", exclusions=2), "Baseline SM exclude 2"),
])
def test_describe_parse_round_trip(spec, text):
    assert spec.describe() == text
    assert BaselineSpec.parse(text) == spec


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        BaselineSpec.parse("Baseline SM random 10%")
    with pytest.raises(ValueError):
        BaselineSpec.parse("just a strategy")


# ===== reduction semantics =====

def test_rms_keeps_exact_count(bench_cache):
    spec = BaselineSpec(kind="RMS", percentage=10)
    run = run_baseline(spec, bench_cache, np.random.default_rng(0))
    assert len(run.mutant_ids) == 10
    assert len(run.operator_ids) == 6  # RMS executes every operator


def test_rms_pays_all_generation_costs(bench_cache):
    spec = BaselineSpec(kind="RMS", percentage=10)
    run = run_baseline(spec, bench_cache, np.random.default_rng(1))
    generation = sum(op.generation_cost for op in bench_cache.operators)
    cost_of = {m.id: m.exec_cost for m in bench_cache.mutants}
    expected = generation + sum(cost_of[m] for m in run.mutant_ids)
    assert run.strategy_cost == pytest.approx(expected, rel=1e-12)


def test_ros_full_percentage_is_identity(bench_cache):
    spec = BaselineSpec(kind="ROS", percentage=100)
    run = run_baseline(spec, bench_cache, np.random.default_rng(0))
    assert run.mutant_ids == tuple(m.id for m in bench_cache.mutants)
    assert run.strategy_cost == pytest.approx(bench_cache.total_cost, rel=1e-12)


def test_ros_keeps_whole_operators(bench_cache):
    spec = BaselineSpec(kind="ROS", percentage=50)
    run = run_baseline(spec, bench_cache, np.random.default_rng(5))
    assert len(run.operator_ids) == 3  # (50 * 6 + 50) // 100
    owner = {m.id: m.operator_id for m in bench_cache.mutants}
    expected = {m.id for m in bench_cache.mutants
                if owner[m.id] in run.operator_ids}
    assert set(run.mutant_ids) == expected


def test_sm_excludes_highest_yield_with_id_tie_break():
    cache = yields_cache()
    spec = BaselineSpec(kind="SM", exclusions=2)
    run = run_baseline(spec, cache, np.random.default_rng(0))
    # A and C tie at 5; both outrank B, so both go.
    assert run.operator_ids == ("B",)
    assert len(run.mutant_ids) == 3
    assert all(m.startswith("B") for m in run.mutant_ids)


def test_sm_is_deterministic_whatever_the_seed():
    cache = yields_cache()
    spec = BaselineSpec(kind="SM", exclusions=1)
    runs = [run_baseline(spec, cache, np.random.default_rng(seed))
            for seed in range(5)]
    assert all(r == runs[0] for r in runs)


def test_sm_can_exclude_everything():
    cache = yields_cache()
    run = run_baseline(BaselineSpec(kind="SM", exclusions=99), cache,
                       np.random.default_rng(0))
    assert run.operator_ids == ()
    assert run.mutant_ids == ()
    assert run.strategy_cost == 0.0


# ===== sweeps =====

def test_sweep_grids():
    assert RMS_SWEEP == (10, 20, 30, 40, 50, 60, 70, 80, 90)
    assert ROS_SWEEP == (10, 20, 30, 40, 50, 60, 70, 80, 90)
    assert SM_SWEEP == (1, 2, 3, 4, 5, 6)
    assert [s.percentage for s in sweep("RMS")] == list(RMS_SWEEP)
    assert [s.percentage for s in sweep("ROS")] == list(ROS_SWEEP)
    assert [s.exclusions for s in sweep("SM")] == list(SM_SWEEP)
    with pytest.raises(ValueError):
        sweep("SMX")
    assert BASELINE_KINDS == ("RMS", "ROS", "SM")


def test_front_sizes_bounded_by_sweep(bench_cache):
    for kind, bound in (("RMS", 9), ("ROS", 9), ("SM", 6)):
        front = baseline_front(kind, bench_cache, seed=3)
        assert 1 <= len(front) <= bound
        for member in front:
            assert member.text.startswith(f"Baseline {kind}")


def test_fronts_are_mutually_nondominated(bench_cache):
    for kind in BASELINE_KINDS:
        front = baseline_front(kind, bench_cache, seed=4)
        for a in front:
            for b in front:
                if a is not b:
                    assert not dominates(ObjectivePair(a.time, a.score),
                                         ObjectivePair(b.time, b.score))


def test_front_deterministic_per_seed(bench_cache):
    a = baseline_front("RMS", bench_cache, seed=6)
    b = baseline_front("RMS", bench_cache, seed=6)
    assert a == b
    c = baseline_front("RMS", bench_cache, seed=7)
    assert a != c


def test_sm_front_identical_across_seeds(bench_cache):
    fronts = [baseline_front("SM", bench_cache, seed=s) for s in range(4)]
    points = [[(m.time, m.score) for m in f] for f in fronts]
    assert all(p == points[0] for p in points)


def test_rms_fronts_vary_but_counts_hold(bench_cache):
    rng_points = set()
    for seed in range(4):
        front = baseline_front("RMS", bench_cache, seed=seed)
        rng_points.add(tuple((m.time, m.score) for m in front))
    assert len(rng_points) > 1


# ===== evaluation aggregation =====

def test_evaluate_baseline_matches_external_aggregation(bench_cache):
    spec = BaselineSpec(kind="RMS", percentage=40)
    seed = 777
    time, score = evaluate_baseline(spec, bench_cache, 5,
                                    np.random.default_rng(seed))

    substreams = np.random.default_rng(seed).spawn(5)
    costs = []
    kills = 0
    for sub in substreams:
        run = run_baseline(spec, bench_cache, sub)
        costs.append(run.strategy_cost)
        kills += select_tests(run.mutant_ids, bench_cache).killed_mutants
    killable = sum(1 for m in bench_cache.mutants if m.killers)
    assert time == math.fsum(costs) / math.fsum([bench_cache.total_cost] * 5)
    assert score == kills / (5 * killable)


def test_rms_means_are_monotone_in_percentage(bench_cache):
    """Larger samples cost more and kill more, on average: check the seed-
    averaged objectives are non-decreasing along the sweep."""
    mean_time = []
    mean_score = []
    for p in RMS_SWEEP:
        spec = BaselineSpec(kind="RMS", percentage=p)
        times, scores = [], []
        for seed in range(30):
            t, s = evaluate_baseline(spec, bench_cache, 3,
                                     np.random.default_rng(seed))
            times.append(t)
            scores.append(s)
        mean_time.append(np.mean(times))
        mean_score.append(np.mean(scores))
    assert all(a <= b + 1e-12 for a, b in zip(mean_time, mean_time[1:]))
    assert all(a <= b + 1e-9 for a, b in zip(mean_score, mean_score[1:]))

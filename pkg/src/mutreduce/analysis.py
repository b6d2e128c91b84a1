"""Front quality indicators and the non-parametric comparison pipeline.

Fronts from different methods are compared the same way whatever produced
them: pool every solution of the experiment, take the non-dominated subset
as the reference front, normalize both coordinates into [0, 1] over the
pooled value ranges (score flipped so both axes are minimized), then
compute per-run hypervolume against reference point (1, 1) and inverted
generational distance against the reference front. Methods are compared
per indicator with a Kruskal-Wallis omnibus test and pairwise
Vargha-Delaney A12 effect sizes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import chi2, rankdata

Point = tuple[float, float]


def _as_points(front: Iterable) -> list[Point]:
    points = []
    for element in front:
        if hasattr(element, "time") and hasattr(element, "score"):
            points.append((float(element.time), float(element.score)))
        else:
            time, score = element
            points.append((float(time), float(score)))
    return points


def _dominates(a: Point, b: Point) -> bool:
    return (a[0] <= b[0] and a[1] >= b[1]) and (a[0] < b[0] or a[1] > b[1])


def reference_front(fronts: Iterable[Iterable]) -> list[Point]:
    """Non-dominated subset of the union of the given fronts.

    Points are (time, score) with time minimized and score maximized.
    Duplicates collapse; the result is sorted by ascending time.
    """
    pool = sorted({p for front in fronts for p in _as_points(front)})
    result = []
    for candidate in pool:
        if not any(_dominates(other, candidate) for other in pool):
            result.append(candidate)
    return result


# ===== Normalization =====

@dataclass(frozen=True)
class Normalizer:
    """Maps (time, score) points into the minimization unit square.

    Bounds come from the pooled experiment solutions. A degenerate axis
    (zero range) maps to the optimal coordinate 0 for every point.
    """

    time_min: float
    time_max: float
    score_min: float
    score_max: float

    @classmethod
    def from_points(cls, points: Iterable[Point]) -> "Normalizer":
        pts = list(points)
        if not pts:
            raise ValueError("cannot normalize an empty point set")
        times = [p[0] for p in pts]
        scores = [p[1] for p in pts]
        return cls(min(times), max(times), min(scores), max(scores))

    def __call__(self, points: Iterable[Point]) -> list[Point]:
        out = []
        time_range = self.time_max - self.time_min
        score_range = self.score_max - self.score_min
        for time, score in points:
            t = (time - self.time_min) / time_range if time_range > 0 else 0.0
            s = 1.0 - (score - self.score_min) / score_range if score_range > 0 else 0.0
            out.append((t, s))
        return out


# ===== Indicators (minimization space, unit square) =====

def hypervolume(points: Iterable[Point], reference: Point = (1.0, 1.0)) -> float:
    """Exact 2-D hypervolume of the region dominated by ``points`` within
    [0, reference]. Points are minimization pairs; ones outside the box
    are clipped onto it and contribute nothing at the reference itself."""
    ref_x, ref_y = reference
    pts = [(min(max(x, 0.0), ref_x), min(max(y, 0.0), ref_y))
           for x, y in _as_points_min(points)]
    if not pts:
        return 0.0
    pts.sort()
    volume = 0.0
    best_y = ref_y
    for x, y in pts:
        if y < best_y:
            volume += (ref_x - x) * (best_y - y)
            best_y = y
    return volume


def _as_points_min(points: Iterable) -> list[Point]:
    return [(float(x), float(y)) for x, y in points]


def igd(front: Iterable[Point], reference: Iterable[Point]) -> float:
    """Inverted generational distance: mean Euclidean distance from each
    reference point to its nearest front point. Errors on empty inputs
    (an empty evaluated front has no meaningful distance)."""
    front_pts = np.asarray(_as_points_min(front), dtype=np.float64)
    ref_pts = np.asarray(_as_points_min(reference), dtype=np.float64)
    if ref_pts.size == 0:
        raise ValueError("reference front is empty")
    if front_pts.size == 0:
        raise ValueError("evaluated front is empty")
    deltas = ref_pts[:, None, :] - front_pts[None, :, :]
    dists = np.sqrt((deltas ** 2).sum(axis=2)).min(axis=1)
    return float(dists.mean())


# ===== Non-parametric statistics =====

def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Kruskal-Wallis H (tie-corrected) and its chi-squared p-value.

    All observations identical is a defined boundary: H = 0, p = 1.
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    sizes = [len(g) for g in groups]
    if any(s == 0 for s in sizes):
        raise ValueError("groups must be non-empty")
    pooled = np.concatenate([np.asarray(g, dtype=np.float64) for g in groups])
    n = pooled.size
    if np.all(pooled == pooled[0]):
        return 0.0, 1.0
    ranks = rankdata(pooled)
    h = 0.0
    start = 0
    for size in sizes:
        rank_sum = ranks[start:start + size].sum()
        h += rank_sum * rank_sum / size
        start += size
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float((counts.astype(np.float64) ** 3 - counts).sum())
    correction = 1.0 - tie_term / (n ** 3 - n)
    h /= correction
    p = float(chi2.sf(h, len(groups) - 1))
    return float(h), p


def kruskal_wallis_permutation(groups: Sequence[Sequence[float]]) -> float:
    """Exact permutation p-value for the Kruskal-Wallis statistic.

    Enumerates every assignment of the pooled observations to groups of
    the given sizes, so it is only feasible for small samples (pooled size
    capped at 12). Intended as a test oracle for the chi-squared
    approximation on small samples.
    """
    sizes = [len(g) for g in groups]
    total = sum(sizes)
    if total > 12:
        raise ValueError("permutation test capped at 12 pooled observations")
    observed, _ = kruskal_wallis(groups)
    pooled = [x for g in groups for x in g]
    indices = range(total)
    at_least = 0
    count = 0
    for assignment in _group_assignments(tuple(indices), sizes):
        sample = [[pooled[i] for i in block] for block in assignment]
        h, _ = kruskal_wallis(sample)
        count += 1
        if h >= observed - 1e-9:
            at_least += 1
    return at_least / count


def _group_assignments(indices: tuple[int, ...], sizes: Sequence[int]):
    if len(sizes) == 1:
        yield (indices,)
        return
    first_size = sizes[0]
    rest_sizes = sizes[1:]
    for chosen in itertools.combinations(indices, first_size):
        chosen_set = set(chosen)
        remaining = tuple(i for i in indices if i not in chosen_set)
        for rest in _group_assignments(remaining, rest_sizes):
            yield (chosen,) + rest


A12_THRESHOLDS = ((0.71, "large"), (0.64, "medium"), (0.56, "small"))


@dataclass(frozen=True)
class A12Result:
    value: float
    magnitude: str


def a12(sample_a: Sequence[float], sample_b: Sequence[float]) -> A12Result:
    """Vargha-Delaney effect size: P(a > b) + 0.5 * P(a = b).

    0.5 means no difference; the magnitude labels follow the customary
    0.56 / 0.64 / 0.71 thresholds on the distance from 0.5.
    """
    if not sample_a or not sample_b:
        raise ValueError("samples must be non-empty")
    more = ties = 0
    for a in sample_a:
        for b in sample_b:
            if a > b:
                more += 1
            elif a == b:
                ties += 1
    value = (more + 0.5 * ties) / (len(sample_a) * len(sample_b))
    scaled = 0.5 + abs(value - 0.5)
    magnitude = "negligible"
    for threshold, label in A12_THRESHOLDS:
        if scaled >= threshold:
            magnitude = label
            break
    return A12Result(value=value, magnitude=magnitude)


# ===== Experiment comparison =====

@dataclass(frozen=True)
class StatReport:
    """Per-indicator comparison of several methods over repeated runs.

    ``values`` maps indicator -> method -> one value per run. Means and
    sample standard deviations summarize them; ``kruskal`` holds (H, p)
    per indicator and ``effect_sizes`` the A12 of the first method versus
    each other method (values are the first method's indicator sample
    against the other's, so for hypervolume > 0.5 favours the first
    method and for IGD < 0.5 does).
    """

    methods: tuple[str, ...]
    values: dict[str, dict[str, list[float]]]
    means: dict[str, dict[str, float]]
    stdevs: dict[str, dict[str, float]]
    kruskal: dict[str, tuple[float, float]]
    effect_sizes: dict[str, dict[str, A12Result]]
    reference: list[Point]
    normalizer: Normalizer

INDICATORS = ("hypervolume", "igd")


def compare_experiment(runs: Mapping[str, Sequence[Iterable]]) -> StatReport:
    """Compare methods on one experiment (same cache, repeated runs).

    ``runs`` maps method name -> per-run fronts of (time, score) solutions
    (EvaluatedStrategy lists work). All methods need the same run count,
    and every front must be non-empty.
    """
    methods = tuple(runs.keys())
    if len(methods) < 2:
        raise ValueError("need at least two methods to compare")
    run_counts = {m: len(runs[m]) for m in methods}
    if len(set(run_counts.values())) != 1:
        raise ValueError(f"mismatched run counts: {run_counts}")
    if next(iter(run_counts.values())) == 0:
        raise ValueError("need at least one run per method")

    per_method_points: dict[str, list[list[Point]]] = {}
    for method in methods:
        fronts = []
        for i, front in enumerate(runs[method]):
            pts = _as_points(front)
            if not pts:
                raise ValueError(f"method {method!r} run {i} has an empty front")
            fronts.append(pts)
        per_method_points[method] = fronts

    pooled = [p for fronts in per_method_points.values() for front in fronts for p in front]
    normalizer = Normalizer.from_points(pooled)
    reference = reference_front(front for fronts in per_method_points.values()
                                for front in fronts)
    reference_norm = normalizer(reference)

    values: dict[str, dict[str, list[float]]] = {ind: {} for ind in INDICATORS}
    for method in methods:
        hv_list, igd_list = [], []
        for front in per_method_points[method]:
            norm = normalizer(front)
            hv_list.append(hypervolume(norm))
            igd_list.append(igd(norm, reference_norm))
        values["hypervolume"][method] = hv_list
        values["igd"][method] = igd_list

    means = {ind: {m: float(np.mean(vals)) for m, vals in per_ind.items()}
             for ind, per_ind in values.items()}
    stdevs = {ind: {m: (float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0)
                    for m, vals in per_ind.items()}
              for ind, per_ind in values.items()}
    kruskal = {ind: kruskal_wallis([per_ind[m] for m in methods])
               for ind, per_ind in values.items()}
    first = methods[0]
    effect_sizes = {
        ind: {other: a12(per_ind[first], per_ind[other]) for other in methods[1:]}
        for ind, per_ind in values.items()
    }
    return StatReport(
        methods=methods,
        values=values,
        means=means,
        stdevs=stdevs,
        kruskal=kruskal,
        effect_sizes=effect_sizes,
        reference=reference,
        normalizer=normalizer,
    )

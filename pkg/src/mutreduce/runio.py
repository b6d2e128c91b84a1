"""On-disk formats for experiment artifacts.

Front files are CSV with columns seed, chromosome, strategy_text, time,
score: one row per front member, sorted by ascending time. ``seed`` is
the row's own evaluation seed, so any row can be re-evaluated standalone;
``chromosome`` is the comma-separated genome (empty for baseline rows).
Run logs are CSV with one row per generation. Manifests are JSON and
record everything needed to reproduce a command's outputs bit for bit:
config, seeds, embedded grammar text, and the cache path with its hash.

All writes are atomic (temp file + rename) and all float formatting uses
the shortest round-trip representation, so identical results are
identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import baselines as baselines_mod
from . import objectives
from .cache import MutationCache
from .genome import Chromosome
from .search import EvaluatedStrategy, Front, GenerationStat
from .strategy import parse_strategy

FRONT_COLUMNS = ("seed", "chromosome", "strategy_text", "time", "score")
RUNLOG_COLUMNS = ("generation", "evaluations", "front_size", "front_hypervolume")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ===== Front files =====

@dataclass(frozen=True)
class FrontRow:
    seed: int
    chromosome: str
    strategy_text: str
    time: float
    score: float


def front_csv_text(front: Front) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(FRONT_COLUMNS)
    for entry in front:
        chromosome = entry.chromosome.serialize() if entry.chromosome else ""
        writer.writerow([entry.eval_seed, chromosome, entry.text,
                         repr(entry.time), repr(entry.score)])
    return buffer.getvalue()


def write_front_csv(path: str | Path, front: Front) -> None:
    atomic_write_text(path, front_csv_text(front))


def read_front_csv(path: str | Path) -> list[FrontRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != FRONT_COLUMNS:
            raise ValueError(
                f"front file {path} must have columns {','.join(FRONT_COLUMNS)}, "
                f"got {reader.fieldnames}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            try:
                rows.append(FrontRow(
                    seed=int(row["seed"]),
                    chromosome=row["chromosome"],
                    strategy_text=row["strategy_text"],
                    time=float(row["time"]),
                    score=float(row["score"]),
                ))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"front file {path}, line {line_no}: {exc}") from exc
    return rows


def front_rows_as_points(rows: Iterable[FrontRow]) -> list[tuple[float, float]]:
    return [(row.time, row.score) for row in rows]


def reevaluate_row(row: FrontRow, cache: MutationCache,
                   repetitions: int = 5) -> tuple[float, float]:
    """Re-run a front row against a cache with the row's own seed.

    On the cache the row was trained on this reproduces the recorded
    objectives exactly (same seed, same repetition streams); on another
    cache it measures how the strategy transfers.
    """
    rng = np.random.default_rng(row.seed)
    if row.strategy_text.startswith("Baseline "):
        spec = baselines_mod.BaselineSpec.parse(row.strategy_text)
        return baselines_mod.evaluate_baseline(spec, cache, repetitions, rng)
    strategy = parse_strategy(row.strategy_text)
    pair = objectives.evaluate(strategy, cache, repetitions, rng=rng)
    return pair.time, pair.score


def reevaluated_front(rows: Sequence[FrontRow], cache: MutationCache,
                      repetitions: int = 5) -> Front:
    front: Front = []
    for row in rows:
        time, score = reevaluate_row(row, cache, repetitions)
        chromosome = Chromosome.deserialize(row.chromosome) if row.chromosome else None
        front.append(EvaluatedStrategy(
            time=time, score=score, eval_seed=row.seed,
            text=row.strategy_text, chromosome=chromosome))
    return front


# ===== Run logs =====

def runlog_csv_text(stats: Sequence[GenerationStat]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RUNLOG_COLUMNS)
    for stat in stats:
        writer.writerow([stat.generation, stat.evaluations, stat.front_size,
                         repr(stat.front_hypervolume)])
    return buffer.getvalue()


def write_runlog_csv(path: str | Path, stats: Sequence[GenerationStat]) -> None:
    atomic_write_text(path, runlog_csv_text(stats))


# ===== Config files =====

_CONFIG_TYPES = {
    "seed": int,
    "population_size": int,
    "max_evaluations": int,
    "repetitions": int,
    "crossover_probability": float,
    "mutation_probability": float,
    "prune_probability": float,
    "duplicate_probability": float,
    "gene_low": int,
    "gene_high": int,
    "min_length": int,
    "max_length": int,
    "max_wraps": int,
}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines (# starts a comment)."""
    values: dict = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_TYPES:
            raise ValueError(f"config line {line_no}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value)
        except ValueError as exc:
            raise ValueError(f"config line {line_no}: bad value for {key}: {value!r}") from exc
    return values


# ===== Manifests =====

def manifest_text(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, indent=1) + "\n"


def write_manifest(path: str | Path, manifest: dict) -> None:
    atomic_write_text(path, manifest_text(manifest))


def read_manifest(path: str | Path) -> dict:
    try:
        manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict):
        raise ValueError(f"manifest {path} must be a JSON object")
    return manifest

"""Integer genotypes and their mapping onto grammar derivations.

A chromosome is a variable-length array of integer genes. Mapping walks
the grammar depth-first, leftmost first; every rule with two or more
alternatives consumes one gene and picks alternative ``gene mod
n_alternatives``. Single-alternative rules consume nothing. When the
genes run out, reading wraps to the front, up to ``max_wraps`` times;
needing one more wrap fails the mapping.

Variation operators (crossover, mutate, prune, duplicate) are pure
functions of their inputs and the supplied generator, and always respect
the configured gene bounds and length limits.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grammar import Grammar, Terminal

GENE_LOW = 0
GENE_HIGH = 179
MIN_LENGTH = 15
MAX_LENGTH = 100
MAX_WRAPS = 10


@dataclass(frozen=True)
class GeneBounds:
    low: int = GENE_LOW
    high: int = GENE_HIGH  # inclusive

    def __post_init__(self) -> None:
        if self.low < 0 or self.high < self.low:
            raise ValueError("gene bounds must satisfy 0 <= low <= high")


@dataclass(frozen=True)
class LengthLimits:
    min: int = MIN_LENGTH
    max: int = MAX_LENGTH

    def __post_init__(self) -> None:
        if self.min < 1 or self.max < self.min:
            raise ValueError("length limits must satisfy 1 <= min <= max")


DEFAULT_BOUNDS = GeneBounds()
DEFAULT_LIMITS = LengthLimits()


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.genes:
            raise ValueError("chromosome must have at least one gene")
        object.__setattr__(self, "genes", tuple(int(g) for g in self.genes))

    def __len__(self) -> int:
        return len(self.genes)

    def serialize(self) -> str:
        return ",".join(str(g) for g in self.genes)

    @classmethod
    def deserialize(cls, text: str) -> "Chromosome":
        try:
            return cls(tuple(int(part) for part in text.split(",")))
        except ValueError as exc:
            raise ValueError(f"bad chromosome text {text!r}") from exc


class MappingStatus(Enum):
    MAPPED = "mapped"
    FAILED = "failed"


@dataclass(frozen=True)
class MappingResult:
    status: MappingStatus
    tokens: tuple[str, ...] | None
    genes_consumed: int
    wraps_used: int

    @property
    def mapped(self) -> bool:
        return self.status is MappingStatus.MAPPED


def random_chromosome(
    rng: np.random.Generator,
    bounds: GeneBounds = DEFAULT_BOUNDS,
    limits: LengthLimits = DEFAULT_LIMITS,
) -> Chromosome:
    length = int(rng.integers(limits.min, limits.max + 1))
    genes = rng.integers(bounds.low, bounds.high + 1, size=length)
    return Chromosome(tuple(int(g) for g in genes))


def map_chromosome(
    chromosome: Chromosome,
    grammar: Grammar,
    max_wraps: int = MAX_WRAPS,
) -> MappingResult:
    """Map genes to the terminal token sequence of a derivation.

    genes_consumed counts gene reads including wrapped ones; wraps_used is
    how many times reading passed the end of the chromosome. On failure
    (the derivation would need wrap max_wraps + 1) tokens is None.
    """
    genes = chromosome.genes
    n = len(genes)
    budget = (max_wraps + 1) * n
    rules = grammar.by_name
    stack: list = [grammar.start]
    tokens: list[str] = []
    reads = 0
    while stack:
        symbol = stack.pop()
        if isinstance(symbol, str):
            productions = rules[symbol].productions
            if len(productions) == 1:
                chosen = productions[0]
            else:
                if reads >= budget:
                    return MappingResult(
                        status=MappingStatus.FAILED,
                        tokens=None,
                        genes_consumed=reads,
                        wraps_used=max_wraps + 1,
                    )
                gene = genes[reads % n]
                reads += 1
                chosen = productions[gene % len(productions)]
            for sym in reversed(chosen.symbols):
                if isinstance(sym, Terminal):
                    if sym.text:
                        stack.append(sym)
                else:
                    stack.append(sym.name)
        else:
            tokens.append(symbol.text)
    wraps = 0 if reads == 0 else (reads - 1) // n
    return MappingResult(
        status=MappingStatus.MAPPED,
        tokens=tuple(tokens),
        genes_consumed=reads,
        wraps_used=wraps,
    )


def crossover(
    parent_a: Chromosome,
    parent_b: Chromosome,
    rng: np.random.Generator,
    bounds: GeneBounds = DEFAULT_BOUNDS,
    limits: LengthLimits = DEFAULT_LIMITS,
) -> tuple[Chromosome, Chromosome]:
    """Single-point crossover with one independent cut per parent.

    Children are prefix_a + suffix_b and prefix_b + suffix_a, then clamped
    to the length limits: truncated at max, padded with fresh random genes
    at min. Cuts keep both sides of each parent non-empty, so parents need
    at least two genes.
    """
    if len(parent_a) < 2 or len(parent_b) < 2:
        raise ValueError("crossover parents must have at least 2 genes")
    cut_a = int(rng.integers(1, len(parent_a)))
    cut_b = int(rng.integers(1, len(parent_b)))
    child_a = parent_a.genes[:cut_a] + parent_b.genes[cut_b:]
    child_b = parent_b.genes[:cut_b] + parent_a.genes[cut_a:]
    return (_clamp(child_a, rng, bounds, limits),
            _clamp(child_b, rng, bounds, limits))


def _clamp(
    genes: tuple[int, ...],
    rng: np.random.Generator,
    bounds: GeneBounds,
    limits: LengthLimits,
) -> Chromosome:
    if len(genes) > limits.max:
        genes = genes[:limits.max]
    if len(genes) < limits.min:
        pad = rng.integers(bounds.low, bounds.high + 1, size=limits.min - len(genes))
        genes = genes + tuple(int(g) for g in pad)
    return Chromosome(genes)


def mutate(
    chromosome: Chromosome,
    rng: np.random.Generator,
    probability: float = 0.01,
    bounds: GeneBounds = DEFAULT_BOUNDS,
) -> Chromosome:
    """Random integer mutation: each gene independently resampled with
    the given probability (the new value may equal the old one)."""
    n = len(chromosome)
    mask = rng.random(n) < probability
    hits = int(mask.sum())
    if hits == 0:
        return chromosome
    replacements = rng.integers(bounds.low, bounds.high + 1, size=hits)
    genes = list(chromosome.genes)
    for position, value in zip(np.flatnonzero(mask), replacements):
        genes[int(position)] = int(value)
    return Chromosome(tuple(genes))


def prune(
    chromosome: Chromosome,
    grammar: Grammar,
    rng: np.random.Generator,
    bounds: GeneBounds = DEFAULT_BOUNDS,
    limits: LengthLimits = DEFAULT_LIMITS,
    max_wraps: int = MAX_WRAPS,
) -> Chromosome:
    """Cut a chromosome down to the prefix its mapping actually reads.

    Only applies to chromosomes that map without wrapping; failed or
    wrapped mappings return the input unchanged. If the consumed prefix is
    shorter than the minimum length it is padded with fresh random genes,
    which the mapping never reads, so the phenotype is unchanged.
    """
    result = map_chromosome(chromosome, grammar, max_wraps)
    if not result.mapped or result.wraps_used > 0:
        return chromosome
    if result.genes_consumed >= len(chromosome):
        return chromosome
    prefix = chromosome.genes[:result.genes_consumed]
    return _clamp(prefix, rng, bounds, limits) if prefix else chromosome


def duplicate(
    chromosome: Chromosome,
    rng: np.random.Generator,
    limits: LengthLimits = DEFAULT_LIMITS,
) -> Chromosome:
    """Append a verbatim copy of a random contiguous segment at the end,
    truncating the copy so the result stays within the maximum length."""
    n = len(chromosome)
    room = limits.max - n
    if room <= 0:
        return chromosome
    start = int(rng.integers(0, n))
    seg_len = int(rng.integers(1, n - start + 1))
    segment = chromosome.genes[start:start + min(seg_len, room)]
    return Chromosome(chromosome.genes + segment)

"""Diversity and performance metrics, pressure-edge extraction, records.

Diversity follows the normalized mean pairwise Hamming distance: the sum
over ordered genome pairs divided by ``M * (M - 1) * N / 2``, so a
uniform-random population scores about 1 and a pair of complementary
genomes scores exactly 2. The implementation sums unordered pairs and
doubles; a test pins the equality with the ordered double loop.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

RUN_CSV_VERSION = "sotea.run.v1"
RUN_CSV_COLUMNS = (
    "generation",
    "best_objective",
    "mean_objective",
    "diversity_full",
    "diversity_top20",
    "L",
    "k_ave",
    "components",
)
AGGREGATE_CSV_VERSION = "sotea.agg.v1"
HISTOGRAM_CSV_VERSION = "sotea.degrees.v1"


def hamming(g1: np.ndarray, g2: np.ndarray) -> int:
    """Number of positions where two equal-length genomes differ."""
    if len(g1) != len(g2):
        raise ValueError(f"genome lengths differ: {len(g1)} vs {len(g2)}")
    return int(np.count_nonzero(np.asarray(g1) != np.asarray(g2)))


def diversity(genomes) -> float:
    """Normalized mean pairwise Hamming distance of a genome list."""
    mat = np.asarray(list(genomes), dtype=np.uint8)
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise ValueError("diversity needs at least 2 genomes")
    m, n = mat.shape
    total = 0
    for i in range(m):
        total += int(np.count_nonzero(mat[i + 1 :] != mat[i]))
    denom = m * (m - 1) * n // 2
    return 2 * total / denom


def top_fraction(population, fraction: float):
    """Genomes of the ceil(fraction * M) individuals with highest objective.

    Ties at the cutoff go to the lower id, so the selection is
    deterministic.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    individuals = list(population)
    if not individuals:
        raise ValueError("empty population")
    count = math.ceil(fraction * len(individuals))
    ranked = sorted(individuals, key=lambda ind: (-ind.objective, ind.id))
    return [ind.genome for ind in ranked[:count]]


def selection_pressure_edges(state, mode: str) -> list[tuple[int, int]]:
    """One (node, least-fit-neighbor) pair per non-isolated node.

    A mock competition trial: nothing dies and no randomness is used;
    fitness ties among a node's neighbors resolve to the lower id.
    """
    from . import engine  # deferred: engine imports this module

    if state.graph is None:
        raise ValueError("pressure edges are defined for structured variants only")
    out = []
    for node in sorted(state.population):
        nbrs = sorted(state.graph.neighbors(node))
        if not nbrs:
            continue
        target = min(nbrs, key=lambda x: (engine.effective_fitness(state, x, mode), x))
        out.append((node, target))
    return out


@dataclass
class RunRecord:
    """Per-generation time series of one run.

    Network columns hold NaN (component_count: -1) on rows where they
    were not measured, and for the panmictic variant always.
    """

    generations: np.ndarray
    best_objective: np.ndarray
    mean_objective: np.ndarray
    diversity_full: np.ndarray
    diversity_top20: np.ndarray
    char_path_length: np.ndarray
    degree_average: np.ndarray
    component_count: np.ndarray
    degree_histograms: dict[int, dict[int, int]] = field(default_factory=dict)

    def row_count(self) -> int:
        return len(self.generations)

    def row_index(self, generation: int) -> int:
        idx = np.searchsorted(self.generations, generation)
        if idx >= len(self.generations) or self.generations[idx] != generation:
            raise KeyError(f"generation {generation} not recorded")
        return int(idx)

    def value(self, column: str, generation: int) -> float:
        return float(getattr(self, column)[self.row_index(generation)])


FLOAT_COLUMNS = (
    "best_objective",
    "mean_objective",
    "diversity_full",
    "diversity_top20",
    "char_path_length",
    "degree_average",
)


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def write_run_csv(record: RunRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {RUN_CSV_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(RUN_CSV_COLUMNS)
        for i in range(record.row_count()):
            comp = int(record.component_count[i])
            writer.writerow(
                [
                    int(record.generations[i]),
                    _fmt(record.best_objective[i]),
                    _fmt(record.mean_objective[i]),
                    _fmt(record.diversity_full[i]),
                    _fmt(record.diversity_top20[i]),
                    _fmt(record.char_path_length[i]),
                    _fmt(record.degree_average[i]),
                    "" if comp < 0 else comp,
                ]
            )


@dataclass
class AggregateRecord:
    """Column-wise mean and sample standard deviation across runs."""

    generations: np.ndarray
    means: dict[str, np.ndarray]
    stds: dict[str, np.ndarray]
    run_count: int


def aggregate(records: list[RunRecord]) -> AggregateRecord:
    """Aggregate equal-shape records; a single record gets std 0."""
    if not records:
        raise ValueError("no records to aggregate")
    gens = records[0].generations
    for rec in records[1:]:
        if not np.array_equal(rec.generations, gens):
            raise ValueError("records disagree on recorded generations")
    means: dict[str, np.ndarray] = {}
    stds: dict[str, np.ndarray] = {}
    columns = FLOAT_COLUMNS + ("component_count",)
    for col in columns:
        stack = np.stack([np.asarray(getattr(r, col), dtype=np.float64) for r in records])
        if col == "component_count":
            stack = np.where(stack < 0, np.nan, stack)
        means[col] = stack.mean(axis=0)
        if len(records) == 1:
            stds[col] = np.zeros_like(stack[0])
        else:
            stds[col] = stack.std(axis=0, ddof=1)
    return AggregateRecord(gens.copy(), means, stds, len(records))


def write_aggregate_csv(agg: AggregateRecord, path) -> None:
    columns = FLOAT_COLUMNS + ("component_count",)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {AGGREGATE_CSV_VERSION} runs={agg.run_count}\n")
        writer = csv.writer(fh)
        header = ["generation"]
        for col in columns:
            header += [f"{col}_mean", f"{col}_std"]
        writer.writerow(header)
        for i in range(len(agg.generations)):
            row = [int(agg.generations[i])]
            for col in columns:
                row += [_fmt(agg.means[col][i]), _fmt(agg.stds[col][i])]
            writer.writerow(row)


def write_degree_histogram_csv(histogram: dict[int, int], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {HISTOGRAM_CSV_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(["degree", "count"])
        for degree in sorted(histogram):
            writer.writerow([degree, histogram[degree]])

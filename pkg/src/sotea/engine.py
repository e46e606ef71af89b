"""Three steady-state EA variants on interaction networks.

Each generation has two phases. Phase 1 draws M parents uniformly with
replacement from the individuals alive at generation start and adds M
mutated offspring (population M -> 2M). Phase 2 runs competition events,
each killing exactly one individual, until the population is back to M.
The panmictic variant competes by binary tournament; the structured
variants (cellular, sotea) pit a uniformly selected individual against
its least-fit neighbor, with the winner absorbing the loser's links.

Fitness is either the raw objective or the neighborhood-rank transform:
with k neighbors of which b outrank the individual, fitness is
``(k - b) / k`` (1.0 when k = 0). For the panmictic variant every other
living individual counts as a neighbor.

Seniority order. Objective ties are resolved by age everywhere in the
fitness machinery: individual x outranks y when x's objective is higher,
or equal with x born earlier (lower id). Rank counting uses this total
order, and a competition whose two contestants have equal effective
fitness kills the younger one. Without the seniority convention every
variant collapses to a single lineage within a few hundred generations,
because established individuals are eroded by the constant stream of
equal-fitness clones they produce; with it, distinct lineages coexist
for thousands of generations, which is the point of the sotea design.

Determinism contract (mirrored bit-for-bit by the compiled kernel)
------------------------------------------------------------------
Streams, via :func:`sotea.rng.derive_seed` on the run seed: landscape
construction uses stream 0, population init stream 1, and generation g
(1-based) uses stream 2g for reproduction and 2g+1 for competition.

Canonical orderings: every order-sensitive iteration walks node ids in
ascending order, and uniform draws index into ascending-id arrays.

Reproduction event draw order: parent index; one ``random()`` per genome
bit ascending (flip when < rate); then per variant: cellular draws one
index among the parent's pre-existing neighbors (ascending); sotea draws
``random() < p_add`` per pre-existing neighbor ascending and, only when
a link was inherited, ``random() < p_remove``.

Competition event draw order: selected index over the living pool; the
panmictic variant then draws an opponent index among the others
(index-shifted past the selected individual); structured variants draw a
uniform index among tied least-fit neighbors only when two or more tie.
An effective-fitness tie between the two contestants consumes no draw
(the younger contestant dies). A structured selection landing on an
isolated node kills nobody (its frequency is counted) and selection
repeats, drawing afresh from the full pool, so a generation always ends
with exactly M individuals.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analysis
from .landscape import NkLandscape
from .network import PopulationGraph, network_stats, new_ring
from .rng import Xoshiro256, derive_seed

VARIANTS = ("panmictic", "cellular", "sotea")
FITNESS_MODES = ("epistatic", "raw")

STREAM_LANDSCAPE = 0
STREAM_INIT = 1


def reproduction_stream(generation: int) -> int:
    return 2 * generation


def competition_stream(generation: int) -> int:
    return 2 * generation + 1


@dataclass(frozen=True)
class EaConfig:
    variant: str
    fitness_mode: str
    m: int
    generations: int
    n: int
    k_nk: int
    mutation_rate: Optional[float] = None  # None means 1/n
    p_add: float = 0.10
    p_remove: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.fitness_mode not in FITNESS_MODES:
            raise ValueError(f"fitness_mode must be one of {FITNESS_MODES}, got {self.fitness_mode!r}")
        if self.m < 3:
            raise ValueError("population size m must be >= 3")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.k_nk <= self.n - 1:
            raise ValueError(f"k_nk must be in [0, {self.n - 1}]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        for name in ("p_add", "p_remove"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")

    @property
    def resolved_mutation_rate(self) -> float:
        return 1.0 / self.n if self.mutation_rate is None else self.mutation_rate

    @property
    def structured(self) -> bool:
        return self.variant != "panmictic"


@dataclass
class Individual:
    id: int
    genome: np.ndarray  # uint8 bits, read-only after birth
    objective: float
    birth_generation: int


class EaState:
    """Mutable run state: living individuals plus their interaction graph."""

    __slots__ = (
        "config",
        "landscape",
        "population",
        "graph",
        "generation",
        "rng",
        "next_id",
        "isolated_retries",
        "trace",
        "_live_ids",
    )

    def __init__(self, config: EaConfig, landscape: NkLandscape):
        self.config = config
        self.landscape = landscape
        self.population: dict[int, Individual] = {}
        self.graph: Optional[PopulationGraph] = None
        self.generation = 0
        self.rng: Optional[Xoshiro256] = None
        self.next_id = 0
        self.isolated_retries = 0
        self.trace: Optional[dict[str, list[int]]] = None
        self._live_ids: list[int] = []

    def live_ids(self) -> list[int]:
        """Living ids in ascending order (the canonical pool order)."""
        return list(self._live_ids)

    def _add_individual(self, ind: Individual) -> None:
        self.population[ind.id] = ind
        self._live_ids.append(ind.id)  # ids only ever grow

    def _remove_individual(self, ind_id: int) -> None:
        del self.population[ind_id]
        self._live_ids.pop(bisect_left(self._live_ids, ind_id))


def init(config: EaConfig, landscape: NkLandscape) -> EaState:
    """Fresh state: M uniform-random genomes, ring graph when structured."""
    if landscape.n != config.n or landscape.k != config.k_nk:
        raise ValueError(
            f"landscape (n={landscape.n}, k={landscape.k}) does not match "
            f"config (n={config.n}, k_nk={config.k_nk})"
        )
    state = EaState(config, landscape)
    rng = Xoshiro256(derive_seed(config.seed, STREAM_INIT))
    for i in range(config.m):
        genome = np.empty(config.n, dtype=np.uint8)
        for j in range(config.n):
            genome[j] = rng.next_u64() & 1
        genome.setflags(write=False)
        state._add_individual(
            Individual(id=i, genome=genome, objective=landscape.evaluate(genome), birth_generation=0)
        )
    state.next_id = config.m
    if config.structured:
        state.graph = new_ring(config.m)
    state.rng = rng
    return state


def mutate(genome: np.ndarray, rate: float, rng: Xoshiro256) -> np.ndarray:
    """Independent per-bit flips, ascending bit order; input unchanged."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    out = np.array(genome, dtype=np.uint8)
    for j in range(len(out)):
        if rng.random() < rate:
            out[j] ^= 1
    return out


def _outranks(other: Individual, ind: Individual) -> bool:
    """Seniority order: higher objective, or equal and born earlier."""
    if other.objective != ind.objective:
        return other.objective > ind.objective
    return other.id < ind.id


def epistatic_fitness(state: EaState, ind_id: int) -> float:
    """Neighborhood rank transform of the objective; in [0, 1].

    b counts the neighbors that outrank the individual in the seniority
    order; the value is (k - b) / k. An isolated individual (and a
    population of one, panmictic) scores 1.0: it is vacuously better
    than every neighbor it has.
    """
    ind = state.population[ind_id]
    if state.graph is not None:
        nbrs = state.graph.neighbors(ind_id)
        k = len(nbrs)
        if k == 0:
            return 1.0
        b = 0
        for x in nbrs:
            if _outranks(state.population[x], ind):
                b += 1
        return (k - b) / k
    k = len(state.population) - 1
    if k == 0:
        return 1.0
    b = 0
    for other_id, other in state.population.items():
        if other_id != ind_id and _outranks(other, ind):
            b += 1
    return (k - b) / k


def effective_fitness(state: EaState, ind_id: int, mode: str) -> float:
    if mode == "raw":
        return state.population[ind_id].objective
    if mode == "epistatic":
        return epistatic_fitness(state, ind_id)
    raise ValueError(f"unknown fitness mode {mode!r}")


def _new_offspring(state: EaState, parent_id: int) -> Individual:
    parent = state.population[parent_id]
    genome = mutate(parent.genome, state.config.resolved_mutation_rate, state.rng)
    genome.setflags(write=False)
    child = Individual(
        id=state.next_id,
        genome=genome,
        objective=state.landscape.evaluate(genome),
        birth_generation=state.generation + 1,
    )
    state.next_id += 1
    if state.trace is not None:
        state.trace["birth_parent"].append(parent_id)
        state.trace["birth_child"].append(child.id)
    return child


def reproduce_panmictic(state: EaState, parent_id: int) -> int:
    if parent_id not in state.population:
        raise KeyError(f"unknown parent {parent_id}")
    child = _new_offspring(state, parent_id)
    state._add_individual(child)
    return child.id


def reproduce_cellular(state: EaState, parent_id: int) -> int:
    """Insert the offspring between the parent and one of its neighbors.

    One pre-existing parent edge, chosen uniformly, is rerouted to the
    offspring; on a cycle this grows the cycle by one node.
    """
    if parent_id not in state.population:
        raise KeyError(f"unknown parent {parent_id}")
    graph = state.graph
    pre_edges = sorted(graph.neighbors(parent_id))
    if not pre_edges:
        raise ValueError(f"cellular parent {parent_id} has no edges to transfer")
    child = _new_offspring(state, parent_id)
    state._add_individual(child)
    graph.add_node(child.id)
    x = pre_edges[state.rng.bounded(len(pre_edges))]
    graph.remove_edge(parent_id, x)
    graph.add_edge(child.id, x)
    graph.add_edge(child.id, parent_id)
    return child.id


def reproduce_sotea(state: EaState, parent_id: int) -> int:
    """Link the offspring to the parent, then inherit links stochastically.

    Each pre-existing parent edge is inherited with probability p_add;
    an inherited link is then lost by the parent with probability
    p_remove. The pre-existing edge set is snapshotted before iteration.
    """
    if parent_id not in state.population:
        raise KeyError(f"unknown parent {parent_id}")
    graph = state.graph
    rng = state.rng
    p_add = state.config.p_add
    p_remove = state.config.p_remove
    pre_edges = sorted(graph.neighbors(parent_id))
    child = _new_offspring(state, parent_id)
    state._add_individual(child)
    graph.add_node(child.id)
    graph.add_edge(child.id, parent_id)
    for x in pre_edges:
        if rng.random() < p_add:
            graph.add_edge(child.id, x)
            if rng.random() < p_remove:
                graph.remove_edge(parent_id, x)
    return child.id


def _kill(state: EaState, loser: int) -> None:
    state._remove_individual(loser)
    if state.trace is not None:
        state.trace["death"].append(loser)


def compete_structured(state: EaState, ind_id: int, mode: str) -> int:
    """One competition event against the least-fit neighbor.

    Isolated selection is a no-op. Fitness is evaluated on the graph as
    it stands right now. Returns the survivor's id.
    """
    if ind_id not in state.population:
        raise KeyError(f"unknown individual {ind_id}")
    graph = state.graph
    rng = state.rng
    nbrs = sorted(graph.neighbors(ind_id))
    if not nbrs:
        return ind_id
    worst = math.inf
    ties: list[int] = []
    for x in nbrs:
        f = effective_fitness(state, x, mode)
        if f < worst:
            worst = f
            ties = [x]
        elif f == worst:
            ties.append(x)
    challenger = ties[rng.bounded(len(ties))] if len(ties) > 1 else ties[0]
    f_self = effective_fitness(state, ind_id, mode)
    if f_self > worst:
        loser = challenger
    elif f_self < worst:
        loser = ind_id
    else:
        loser = max(ind_id, challenger)  # equal fitness: the younger dies
    winner = challenger if loser == ind_id else ind_id
    graph.transfer_links(winner, loser)
    _kill(state, loser)
    return winner


def compete_panmictic(state: EaState, ind_id: int) -> int:
    """Binary tournament: the worse of the pair dies; returns the survivor."""
    if ind_id not in state.population:
        raise KeyError(f"unknown individual {ind_id}")
    pool = state._live_ids
    if len(pool) < 2:
        raise ValueError("panmictic competition needs at least 2 individuals")
    rng = state.rng
    mode = state.config.fitness_mode
    si = bisect_left(pool, ind_id)
    oi = rng.bounded(len(pool) - 1)
    if oi >= si:
        oi += 1
    opponent = pool[oi]
    f_self = effective_fitness(state, ind_id, mode)
    f_opp = effective_fitness(state, opponent, mode)
    if f_self > f_opp:
        loser = opponent
    elif f_self < f_opp:
        loser = ind_id
    else:
        loser = max(ind_id, opponent)  # equal fitness: the younger dies
    _kill(state, loser)
    return opponent if loser == ind_id else ind_id


def run_generation(state: EaState) -> None:
    """One pseudo-steady-state generation: M births, then M deaths."""
    config = state.config
    m = config.m
    gen = state.generation + 1

    state.rng = Xoshiro256(derive_seed(config.seed, reproduction_stream(gen)))
    parents = state.live_ids()
    if config.variant == "sotea":
        reproduce = reproduce_sotea
    elif config.variant == "cellular":
        reproduce = reproduce_cellular
    else:
        reproduce = reproduce_panmictic
    for _ in range(m):
        parent_id = parents[state.rng.bounded(len(parents))]
        reproduce(state, parent_id)

    state.rng = Xoshiro256(derive_seed(config.seed, competition_stream(gen)))
    deaths = 0
    while deaths < m:
        pool = state._live_ids
        selected = pool[state.rng.bounded(len(pool))]
        if config.variant == "panmictic":
            compete_panmictic(state, selected)
            deaths += 1
        else:
            before = len(state.population)
            compete_structured(state, selected, config.fitness_mode)
            if len(state.population) == before:
                state.isolated_retries += 1
                if state.graph.edge_count() == 0:
                    raise RuntimeError(
                        "every living individual is isolated; competition cannot "
                        "reduce the population back to M"
                    )
                continue
            deaths += 1
    state.generation = gen


# ---------------------------------------------------------------------------
# whole-run driver with per-generation records
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    config: EaConfig
    record: analysis.RunRecord
    final_state: EaState
    engine: str
    meta: dict = field(default_factory=dict)
    trace: Optional[dict[str, np.ndarray]] = None


def record_generations(generations: int, metric_stride: int) -> np.ndarray:
    """Generations at which a record row is emitted (0 and the final one always)."""
    if metric_stride < 1:
        raise ValueError("metric_stride must be >= 1")
    gens = [g for g in range(generations + 1) if g % metric_stride == 0]
    if gens[-1] != generations:
        gens.append(generations)
    return np.asarray(gens, dtype=np.int64)


def network_measure_flags(row_gens: np.ndarray, generations: int, network_stride: int, structured: bool) -> np.ndarray:
    if network_stride < 1:
        raise ValueError("network_stride must be >= 1")
    flags = np.zeros(len(row_gens), dtype=np.uint8)
    if structured:
        for i, g in enumerate(row_gens):
            flags[i] = 1 if (g % network_stride == 0 or g == generations) else 0
    return flags


def compiled_available() -> bool:
    try:
        from . import _kernel  # noqa: F401
    except ImportError:
        return False
    return True


def _resolve_engine(engine: str) -> str:
    if engine == "auto":
        return "compiled" if compiled_available() else "python"
    if engine == "compiled" and not compiled_available():
        raise RuntimeError("compiled kernel requested but not built")
    if engine not in ("compiled", "python"):
        raise ValueError(f"engine must be auto, python, or compiled, got {engine!r}")
    return engine


def run(
    config: EaConfig,
    *,
    metric_stride: int = 1,
    network_stride: int = 20,
    snapshot_generations=None,
    engine: str = "auto",
    trace: bool = False,
) -> RunResult:
    """Run a full experiment replication and collect its RunRecord.

    The compiled kernel and the pure-Python engine implement the same
    contract; `engine="auto"` picks the kernel when it is built. Output
    is byte-identical either way.
    """
    engine_used = _resolve_engine(engine)
    row_gens = record_generations(config.generations, metric_stride)
    net_flags = network_measure_flags(row_gens, config.generations, network_stride, config.structured)
    snaps = sorted(set(int(g) for g in (snapshot_generations or [])))
    if snaps and (snaps[0] < 0 or snaps[-1] > config.generations):
        raise ValueError("snapshot generations must lie within [0, generations]")
    if engine_used == "compiled":
        return _run_kernel(config, row_gens, net_flags, snaps, trace)
    return _run_python(config, row_gens, net_flags, snaps, trace)


_TOP_FRACTION = 0.2


def _measure_row(state: EaState, want_network: bool):
    live = state._live_ids
    pop = state.population
    best = -math.inf
    acc = 0.0
    for ind_id in live:
        v = pop[ind_id].objective
        if v > best:
            best = v
        acc += v
    mean = acc / len(live)
    genomes = [pop[i].genome for i in live]
    div_full = analysis.diversity(genomes) if len(genomes) >= 2 else math.nan
    top_count = math.ceil(_TOP_FRACTION * len(live))
    if top_count >= 2:
        div_top = analysis.diversity(analysis.top_fraction(pop.values(), _TOP_FRACTION))
    else:
        div_top = math.nan
    if want_network and state.graph is not None:
        stats = network_stats(state.graph)
        return best, mean, div_full, div_top, stats.char_path_length, stats.degree_average, stats.component_count
    return best, mean, div_full, div_top, math.nan, math.nan, -1


def _degree_histogram(state: EaState) -> dict[int, int]:
    if state.graph is None:
        # the panmictic population is an implicit complete graph
        p = len(state.population)
        return {p - 1: p}
    hist: dict[int, int] = {}
    for node in state.graph.nodes():
        d = state.graph.degree(node)
        hist[d] = hist.get(d, 0) + 1
    return hist


def _run_python(config, row_gens, net_flags, snaps, trace) -> RunResult:
    landscape = NkLandscape.generate(config.n, config.k_nk, derive_seed(config.seed, STREAM_LANDSCAPE))
    state = init(config, landscape)
    if trace:
        state.trace = {"birth_parent": [], "birth_child": [], "death": []}
    rows = len(row_gens)
    cols = {
        "best_objective": np.full(rows, np.nan),
        "mean_objective": np.full(rows, np.nan),
        "diversity_full": np.full(rows, np.nan),
        "diversity_top20": np.full(rows, np.nan),
        "char_path_length": np.full(rows, np.nan),
        "degree_average": np.full(rows, np.nan),
    }
    components = np.full(rows, -1, dtype=np.int64)
    histograms: dict[int, dict[int, int]] = {}
    row_of = {int(g): i for i, g in enumerate(row_gens)}
    snap_set = set(snaps)

    def observe():
        g = state.generation
        if g in row_of:
            i = row_of[g]
            row = _measure_row(state, bool(net_flags[i]))
            (
                cols["best_objective"][i],
                cols["mean_objective"][i],
                cols["diversity_full"][i],
                cols["diversity_top20"][i],
                cols["char_path_length"][i],
                cols["degree_average"][i],
                components[i],
            ) = row
        if g in snap_set:
            histograms[g] = _degree_histogram(state)

    observe()
    for _ in range(config.generations):
        run_generation(state)
        observe()
    record = analysis.RunRecord(
        generations=row_gens.copy(),
        best_objective=cols["best_objective"],
        mean_objective=cols["mean_objective"],
        diversity_full=cols["diversity_full"],
        diversity_top20=cols["diversity_top20"],
        char_path_length=cols["char_path_length"],
        degree_average=cols["degree_average"],
        component_count=components,
        degree_histograms=histograms,
    )
    trace_out = None
    if trace:
        trace_out = {k: np.asarray(v, dtype=np.int64) for k, v in state.trace.items()}
        state.trace = None
    return RunResult(
        config=config,
        record=record,
        final_state=state,
        engine="python",
        meta={"isolated_retries": state.isolated_retries},
        trace=trace_out,
    )


_VARIANT_CODES = {"panmictic": 0, "cellular": 1, "sotea": 2}
_MODE_CODES = {"raw": 0, "epistatic": 1}


def _run_kernel(config, row_gens, net_flags, snaps, trace) -> RunResult:
    from . import _kernel

    out = _kernel.run_core(
        _VARIANT_CODES[config.variant],
        _MODE_CODES[config.fitness_mode],
        config.m,
        config.n,
        config.k_nk,
        config.generations,
        config.resolved_mutation_rate,
        config.p_add,
        config.p_remove,
        config.seed,
        row_gens,
        net_flags,
        np.asarray(snaps, dtype=np.int64),
        trace,
        _TOP_FRACTION,
    )
    landscape = NkLandscape(
        config.n, config.k_nk, out["wiring"], out["tables"], seed=derive_seed(config.seed, STREAM_LANDSCAPE)
    )
    state = EaState(config, landscape)
    ids = out["ids"]
    genomes = out["genomes"]
    for i in range(len(ids)):
        genome = genomes[i]
        genome.setflags(write=False)
        state._add_individual(
            Individual(
                id=int(ids[i]),
                genome=genome,
                objective=float(out["objectives"][i]),
                birth_generation=int(out["birth"][i]),
            )
        )
    if config.structured:
        graph = PopulationGraph(ids.tolist())
        for a, b in out["edges"]:
            graph.add_edge(int(a), int(b))
        state.graph = graph
    state.generation = config.generations
    state.next_id = int(out["next_id"])
    state.isolated_retries = int(out["isolated_retries"])
    record = analysis.RunRecord(
        generations=row_gens.copy(),
        best_objective=out["best_objective"],
        mean_objective=out["mean_objective"],
        diversity_full=out["diversity_full"],
        diversity_top20=out["diversity_top20"],
        char_path_length=out["char_path_length"],
        degree_average=out["degree_average"],
        component_count=out["component_count"],
        degree_histograms=out["degree_histograms"],
    )
    trace_out = None
    if trace:
        trace_out = {
            "birth_parent": out["trace_birth_parent"],
            "birth_child": out["trace_birth_child"],
            "death": out["trace_death"],
        }
    return RunResult(
        config=config,
        record=record,
        final_state=state,
        engine="compiled",
        meta={"isolated_retries": state.isolated_retries},
        trace=trace_out,
    )

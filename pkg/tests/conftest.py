import numpy as np
import pytest

from sotea.engine import EaConfig, EaState, Individual
from sotea.landscape import NkLandscape
from sotea.network import PopulationGraph
from sotea.rng import Xoshiro256


@pytest.fixture
def tiny_landscape():
    return NkLandscape.generate(16, 3, seed=99)


def make_structured_state(objectives, edges, variant="sotea", fitness_mode="epistatic", seed=1234):
    """Hand-built state: one individual per objective, explicit graph.

    Genomes are synthetic (all zeros) because the op-level tests care
    about fitness values and graph structure only.
    """
    m = max(3, len(objectives))
    config = EaConfig(
        variant=variant, fitness_mode=fitness_mode, m=m, generations=10,
        n=8, k_nk=0, seed=seed,
    )
    landscape = NkLandscape(8, 0, [[] for _ in range(8)], [[0.0, 1.0]] * 8)
    state = EaState(config, landscape)
    graph = PopulationGraph()
    for i, obj in enumerate(objectives):
        genome = np.zeros(8, dtype=np.uint8)
        genome.setflags(write=False)
        state._add_individual(Individual(id=i, genome=genome, objective=float(obj), birth_generation=0))
        graph.add_node(i)
    for a, b in edges:
        graph.add_edge(a, b)
    state.graph = graph
    state.next_id = len(objectives)
    state.rng = Xoshiro256(seed)
    return state


def make_panmictic_state(objectives, fitness_mode="raw", seed=1234):
    m = max(3, len(objectives))
    config = EaConfig(
        variant="panmictic", fitness_mode=fitness_mode, m=m, generations=10,
        n=8, k_nk=0, seed=seed,
    )
    landscape = NkLandscape(8, 0, [[] for _ in range(8)], [[0.0, 1.0]] * 8)
    state = EaState(config, landscape)
    for i, obj in enumerate(objectives):
        genome = np.zeros(8, dtype=np.uint8)
        genome.setflags(write=False)
        state._add_individual(Individual(id=i, genome=genome, objective=float(obj), birth_generation=0))
    state.next_id = len(objectives)
    state.rng = Xoshiro256(seed)
    return state


def floyd_warshall_lengths(graph):
    """Dense all-pairs shortest paths; the slow reference for small graphs."""
    nodes = sorted(graph.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    inf = float("inf")
    dist = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for a, b in graph.edges():
        dist[index[a]][index[b]] = 1
        dist[index[b]][index[a]] = 1
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == inf:
                continue
            di = dist[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return nodes, dist


def floyd_warshall_char_path_length(graph):
    _, dist = floyd_warshall_lengths(graph)
    total = 0
    pairs = 0
    n = len(dist)
    for i in range(n):
        for j in range(n):
            if i != j and dist[i][j] != float("inf"):
                total += dist[i][j]
                pairs += 1
    return total / pairs if pairs else float("nan")

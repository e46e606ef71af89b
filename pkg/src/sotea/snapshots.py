"""Graph snapshot export: DOT, edge list, node attributes, pressure edges.

These are the offline-analysis surfaces: plain text files a plotting or
network-analysis pipeline can consume without importing this package.
"""

from __future__ import annotations

import csv

from . import analysis

NODES_CSV_VERSION = "sotea.nodes.v1"
EDGES_CSV_VERSION = "sotea.edges.v1"
PRESSURE_CSV_VERSION = "sotea.pressure.v1"


def write_dot(graph, path, name: str = "population") -> None:
    """One undirected graph per file, nodes and edges in ascending order."""
    lines = [f"graph {name} {{"]
    for node in sorted(graph.nodes()):
        lines.append(f"  {node};")
    for a, b in graph.edges():
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_edge_list_csv(graph, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {EDGES_CSV_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(["source", "target"])
        for a, b in graph.edges():
            writer.writerow([a, b])


def write_node_attributes_csv(state, path) -> None:
    """Per-node id, degree, objective, epistatic fitness, birth generation."""
    from . import engine

    if state.graph is None:
        raise ValueError("node attribute export needs a structured variant")
    with open(path, "w", newline="") as fh:
        fh.write(f"# {NODES_CSV_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(["id", "degree", "objective", "epistatic_fitness", "birth_generation"])
        for node in sorted(state.population):
            ind = state.population[node]
            writer.writerow(
                [
                    node,
                    state.graph.degree(node),
                    repr(ind.objective),
                    repr(engine.epistatic_fitness(state, node)),
                    ind.birth_generation,
                ]
            )


def write_pressure_edges_csv(state, mode: str, path) -> None:
    """Mock-trial pressure edges under the given fitness mode."""
    from . import engine

    edges = analysis.selection_pressure_edges(state, mode)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {PRESSURE_CSV_VERSION} mode={mode}\n")
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "source_fitness", "target_fitness"])
        for src, dst in edges:
            writer.writerow(
                [
                    src,
                    dst,
                    repr(engine.effective_fitness(state, src, mode)),
                    repr(engine.effective_fitness(state, dst, mode)),
                ]
            )

import csv

from conftest import make_structured_state
from sotea import snapshots
from sotea.engine import EaConfig, run
from sotea.network import new_ring


def test_dot_export(tmp_path):
    g = new_ring(4)
    path = tmp_path / "g.dot"
    snapshots.write_dot(g, path)
    text = path.read_text()
    assert text.startswith("graph population {")
    assert "  0 -- 1;" in text
    assert "  0 -- 3;" in text
    assert text.rstrip().endswith("}")
    assert text.count("--") == 4


def test_edge_list_csv(tmp_path):
    g = new_ring(4)
    path = tmp_path / "edges.csv"
    snapshots.write_edge_list_csv(g, path)
    rows = [r for r in csv.reader(path.read_text().splitlines()[1:])]
    assert rows[0] == ["source", "target"]
    assert ["0", "1"] in rows and ["0", "3"] in rows
    assert len(rows) == 5


def test_node_attributes_csv(tmp_path):
    state = make_structured_state([0.5, 0.25, 0.75], [(0, 1), (1, 2)])
    path = tmp_path / "nodes.csv"
    snapshots.write_node_attributes_csv(state, path)
    rows = list(csv.reader(path.read_text().splitlines()[1:]))
    assert rows[0] == ["id", "degree", "objective", "epistatic_fitness", "birth_generation"]
    assert rows[1] == ["0", "1", "0.5", "1.0", "0"]
    assert rows[2][0] == "1" and rows[2][1] == "2"
    assert float(rows[2][3]) == 0.0  # beaten by both neighbors


def test_pressure_csv_both_modes(tmp_path):
    state = make_structured_state([0.9, 0.3, 0.4, 0.1, 0.2, 0.45],
                                  [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)])
    raw_path = tmp_path / "raw.csv"
    epi_path = tmp_path / "epi.csv"
    snapshots.write_pressure_edges_csv(state, "raw", raw_path)
    snapshots.write_pressure_edges_csv(state, "epistatic", epi_path)
    raw_rows = {r[0]: r[1] for r in csv.reader(raw_path.read_text().splitlines()[2:])}
    epi_rows = {r[0]: r[1] for r in csv.reader(epi_path.read_text().splitlines()[2:])}
    assert raw_rows["0"] == "1"
    assert epi_rows["0"] == "2"


def test_snapshot_files_from_real_run(tmp_path):
    cfg = EaConfig(variant="cellular", fitness_mode="epistatic", m=10, generations=15,
                   n=8, k_nk=1, seed=3)
    state = run(cfg, metric_stride=15).final_state
    snapshots.write_dot(state.graph, tmp_path / "run.dot")
    text = (tmp_path / "run.dot").read_text()
    assert text.count("--") == 10  # a cycle keeps exactly M edges

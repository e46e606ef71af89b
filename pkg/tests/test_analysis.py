import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_panmictic_state, make_structured_state
from sotea import analysis
from sotea.engine import EaConfig, run


def genome(bits):
    return np.array(bits, dtype=np.uint8)


def test_hamming_examples():
    assert analysis.hamming(genome([0, 1, 1, 0]), genome([0, 1, 1, 0])) == 0
    assert analysis.hamming(genome([0, 1, 1, 0]), genome([1, 0, 0, 1])) == 4
    assert analysis.hamming(genome([0, 1, 1, 0]), genome([0, 0, 1, 1])) == 2
    with pytest.raises(ValueError):
        analysis.hamming(genome([0, 1]), genome([0, 1, 0]))


def test_diversity_identical_population_is_zero():
    assert analysis.diversity([genome([1, 0, 1])] * 5) == 0.0


def test_diversity_complementary_pair_is_two():
    assert analysis.diversity([genome([0] * 9), genome([1] * 9)]) == 2.0


def test_diversity_uniform_random_near_one():
    rng = np.random.default_rng(7)
    genomes = rng.integers(0, 2, size=(100, 30)).astype(np.uint8)
    assert analysis.diversity(list(genomes)) == pytest.approx(1.0, abs=0.05)


def test_diversity_needs_two_genomes():
    with pytest.raises(ValueError):
        analysis.diversity([genome([0, 1])])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(1, 16), st.integers(0, 2**31))
def test_diversity_matches_double_loop_oracle(m, n, seed):
    rng = np.random.default_rng(seed)
    genomes = [rng.integers(0, 2, n).astype(np.uint8) for _ in range(m)]
    total = 0
    for i in range(m):
        for j in range(m):
            if i != j:
                total += int(np.count_nonzero(genomes[i] != genomes[j]))
    assert analysis.diversity(genomes) == total / (m * (m - 1) * n / 2)


def test_diversity_permutation_invariant():
    rng = np.random.default_rng(3)
    genomes = [rng.integers(0, 2, 12).astype(np.uint8) for _ in range(8)]
    shuffled = [genomes[i] for i in (5, 2, 7, 0, 1, 6, 3, 4)]
    relabeled = [g[::-1].copy() for g in genomes]
    assert analysis.diversity(shuffled) == analysis.diversity(genomes)
    assert analysis.diversity(relabeled) == analysis.diversity(genomes)


def test_top_fraction_whole_population():
    state = make_panmictic_state([0.1, 0.5, 0.3])
    top = analysis.top_fraction(state.population.values(), 1.0)
    assert len(top) == 3


def test_top_fraction_counts_and_cutoff_tie():
    objs = [0.9, 0.5, 0.5, 0.2, 0.1]
    state = make_panmictic_state(objs)
    top = analysis.top_fraction(state.population.values(), 0.4)
    # ceil(0.4 * 5) = 2; ids 0 (0.9) then the tie at 0.5 resolves to id 1
    ranked = sorted(state.population.values(), key=lambda i: (-i.objective, i.id))[:2]
    assert [i.id for i in ranked] == [0, 1]
    assert len(top) == 2


def test_top_fraction_validation():
    state = make_panmictic_state([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        analysis.top_fraction(state.population.values(), 0.0)
    with pytest.raises(ValueError):
        analysis.top_fraction([], 0.5)


def test_pressure_edges_triangle_points_at_worst():
    state = make_structured_state([0.9, 0.5, 0.1], [(0, 1), (1, 2), (0, 2)], fitness_mode="raw")
    edges = dict(analysis.selection_pressure_edges(state, "raw"))
    assert edges[0] == 2
    assert edges[1] == 2
    assert edges[2] == 1  # the worst node points at its worst neighbor


def test_pressure_edges_skip_isolated():
    state = make_structured_state([0.9, 0.5, 0.1], [(0, 1)])
    edges = analysis.selection_pressure_edges(state, "raw")
    assert [src for src, _ in edges] == [0, 1]


def test_pressure_edges_one_per_connected_node():
    state = make_structured_state([0.5, 0.4, 0.3, 0.2, 0.6], [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
    edges = analysis.selection_pressure_edges(state, "epistatic")
    assert len(edges) == 5
    assert [src for src, _ in edges] == [0, 1, 2, 3, 4]


def test_pressure_edges_modes_can_disagree():
    # Node 0 sees neighbor 1 (objectively worst, but only locally beaten
    # once, rank 2/3) and neighbor 2 (objectively better, yet bottom of
    # its own neighborhood, rank 0): the two orderings invert.
    objs = [0.9, 0.3, 0.4, 0.1, 0.2, 0.45]
    edges = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)]
    state = make_structured_state(objs, edges)
    raw = dict(analysis.selection_pressure_edges(state, "raw"))
    epi = dict(analysis.selection_pressure_edges(state, "epistatic"))
    assert raw[0] == 1
    assert epi[0] == 2


def test_pressure_edges_require_graph():
    state = make_panmictic_state([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        analysis.selection_pressure_edges(state, "raw")


def _quick_record(seed, generations=12):
    cfg = EaConfig(variant="cellular", fitness_mode="epistatic", m=12, generations=generations,
                   n=8, k_nk=2, seed=seed)
    return run(cfg, metric_stride=4, network_stride=8).record


def test_aggregate_single_record_mean_is_identity():
    rec = _quick_record(5)
    agg = analysis.aggregate([rec])
    assert np.array_equal(agg.generations, rec.generations)
    assert np.allclose(agg.means["best_objective"], rec.best_objective, equal_nan=True)
    assert np.all(agg.stds["best_objective"] == 0.0)


def test_aggregate_two_records_mean():
    r1, r2 = _quick_record(5), _quick_record(6)
    agg = analysis.aggregate([r1, r2])
    expected = (r1.best_objective + r2.best_objective) / 2
    assert np.allclose(agg.means["best_objective"], expected, equal_nan=True)
    assert agg.run_count == 2


def test_aggregate_is_deterministic_over_reruns():
    a = analysis.aggregate([_quick_record(s) for s in (1, 2, 3)])
    b = analysis.aggregate([_quick_record(s) for s in (1, 2, 3)])
    for col in agg_columns():
        assert np.array_equal(a.means[col], b.means[col], equal_nan=True)
        assert np.array_equal(a.stds[col], b.stds[col], equal_nan=True)


def agg_columns():
    return analysis.FLOAT_COLUMNS + ("component_count",)


def test_aggregate_shape_mismatch_rejected():
    r1 = _quick_record(5, generations=12)
    r2 = _quick_record(5, generations=16)
    with pytest.raises(ValueError):
        analysis.aggregate([r1, r2])
    with pytest.raises(ValueError):
        analysis.aggregate([])


def test_run_csv_format(tmp_path):
    rec = _quick_record(5)
    path = tmp_path / "run.csv"
    analysis.write_run_csv(rec, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# sotea.run.v1"
    assert lines[1] == "generation,best_objective,mean_objective,diversity_full,diversity_top20,L,k_ave,components"
    assert len(lines) == 2 + rec.row_count()
    # unmeasured network cells are empty, not NaN text
    assert "nan" not in path.read_text()


def test_record_value_lookup():
    rec = _quick_record(5)
    assert rec.value("best_objective", 0) == rec.best_objective[0]
    with pytest.raises(KeyError):
        rec.value("best_objective", 7)


def test_histogram_csv(tmp_path):
    path = tmp_path / "hist.csv"
    analysis.write_degree_histogram_csv({2: 5, 1: 3, 4: 1}, path)
    lines = path.read_text().splitlines()
    assert lines[1] == "degree,count"
    assert lines[2:] == ["1,3", "2,5", "4,1"]

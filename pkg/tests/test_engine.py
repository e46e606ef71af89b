import numpy as np
import pytest

from conftest import make_panmictic_state, make_structured_state
from sotea import engine
from sotea.engine import (
    EaConfig,
    STREAM_INIT,
    compete_panmictic,
    compete_structured,
    effective_fitness,
    epistatic_fitness,
    init,
    mutate,
    record_generations,
    reproduce_cellular,
    reproduce_panmictic,
    reproduce_sotea,
    run,
    run_generation,
)
from sotea.landscape import NkLandscape
from sotea.rng import Xoshiro256, derive_seed


def small_config(**over):
    base = dict(variant="cellular", fitness_mode="epistatic", m=12, generations=20,
                n=10, k_nk=2, seed=77)
    base.update(over)
    return EaConfig(**base)


def make_run_state(**over):
    cfg = small_config(**over)
    scape = NkLandscape.generate(cfg.n, cfg.k_nk, derive_seed(cfg.seed, 0))
    return init(cfg, scape)


# ---------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(variant="island")
    with pytest.raises(ValueError):
        small_config(fitness_mode="weird")
    with pytest.raises(ValueError):
        small_config(m=2)
    with pytest.raises(ValueError):
        small_config(k_nk=10)
    with pytest.raises(ValueError):
        small_config(p_add=1.5)
    assert small_config(n=25).resolved_mutation_rate == 1 / 25
    assert small_config(n=25, mutation_rate=0.5).resolved_mutation_rate == 0.5


# ---------------------------------------------------------------- init


def test_init_cellular_ring():
    state = make_run_state(variant="cellular", m=100, n=8, k_nk=1)
    assert len(state.population) == 100
    assert all(state.graph.degree(v) == 2 for v in state.graph.nodes())
    assert sorted(state.population) == sorted(state.graph.nodes())


def test_init_panmictic_has_no_graph():
    state = make_run_state(variant="panmictic", m=50)
    assert state.graph is None
    assert len(state.population) == 50


def test_init_same_seed_identical_genomes():
    a = make_run_state()
    b = make_run_state()
    for i in a.population:
        assert np.array_equal(a.population[i].genome, b.population[i].genome)
        assert a.population[i].objective == b.population[i].objective


def test_init_rejects_mismatched_landscape():
    cfg = small_config(n=10, k_nk=2)
    with pytest.raises(ValueError):
        init(cfg, NkLandscape.generate(9, 2, 1))


def test_objectives_match_reevaluation():
    state = make_run_state()
    for ind in state.population.values():
        assert ind.objective == state.landscape.evaluate(ind.genome)


# ---------------------------------------------------------------- mutate


def test_mutate_rate_zero_is_identity():
    rng = Xoshiro256(1)
    g = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
    out = mutate(g, 0.0, rng)
    assert np.array_equal(out, g)
    assert out is not g


def test_mutate_rate_one_is_complement():
    rng = Xoshiro256(1)
    g = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
    assert np.array_equal(mutate(g, 1.0, rng), 1 - g)


def test_mutate_leaves_input_unchanged():
    rng = Xoshiro256(1)
    g = np.array([0, 1, 0], dtype=np.uint8)
    mutate(g, 1.0, rng)
    assert np.array_equal(g, [0, 1, 0])


def test_mutate_mean_flip_count():
    rng = Xoshiro256(5)
    n = 10
    g = np.zeros(n, dtype=np.uint8)
    flips = 0
    trials = 100_000
    for _ in range(trials):
        flips += int(mutate(g, 1 / n, rng).sum())
    assert flips / trials == pytest.approx(1.0, abs=0.05)


def test_mutate_validates_rate():
    with pytest.raises(ValueError):
        mutate(np.zeros(3, dtype=np.uint8), 1.5, Xoshiro256(1))


# ------------------------------------------------------- epistatic fitness


def test_rank_better_than_two_of_three():
    state = make_structured_state([0.5, 0.2, 0.3, 0.9], [(0, 1), (0, 2), (0, 3)])
    assert epistatic_fitness(state, 0) == 2 / 3


def test_rank_best_of_neighborhood_is_one():
    state = make_structured_state([0.9, 0.2, 0.3, 0.4], [(0, 1), (0, 2), (0, 3)])
    assert epistatic_fitness(state, 0) == 1.0


def test_rank_worst_of_neighborhood_is_zero():
    state = make_structured_state([0.1, 0.2, 0.3, 0.4, 0.5], [(0, 1), (0, 2), (0, 3), (0, 4)])
    assert epistatic_fitness(state, 0) == 0.0


def test_rank_isolated_node_scores_one():
    state = make_structured_state([0.1, 0.5, 0.6], [(1, 2)])
    assert epistatic_fitness(state, 0) == 1.0


def test_rank_equal_objective_counts_older_only():
    # 1 is older than 2; equal objectives
    state = make_structured_state([0.9, 0.4, 0.4], [(1, 2), (0, 1), (0, 2)])
    assert epistatic_fitness(state, 1) == 0.5  # beaten by 0 only
    assert epistatic_fitness(state, 2) == 0.0  # beaten by 0 and by older equal 1


def test_rank_stability_noncrossing_change():
    state = make_structured_state([0.5, 0.2, 0.8], [(0, 1), (0, 2)])
    before = epistatic_fitness(state, 0)
    state.population[1].objective = 0.3  # still below node 0
    assert epistatic_fitness(state, 0) == before


def test_effective_fitness_modes():
    state = make_structured_state([0.5, 0.2, 0.9], [(0, 1), (0, 2)])
    assert effective_fitness(state, 0, "raw") == 0.5
    assert effective_fitness(state, 0, "epistatic") == 0.5  # outranked by 2 only
    with pytest.raises(ValueError):
        effective_fitness(state, 0, "other")


def test_panmictic_rank_order_matches_objective_order():
    state = make_panmictic_state([0.1, 0.7, 0.4, 0.7, 0.9], fitness_mode="epistatic")
    epi = {i: effective_fitness(state, i, "epistatic") for i in state.population}
    # rank is a bijection onto {0, 1/4, ..., 1}: seniority separates the tie
    assert sorted(epi.values()) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert epi[4] == 1.0 and epi[0] == 0.0
    assert epi[1] == 0.75 and epi[3] == 0.5  # equal objectives: older ranks higher
    raw = {i: effective_fitness(state, i, "raw") for i in state.population}
    for a in state.population:
        for b in state.population:
            if raw[a] < raw[b]:
                assert epi[a] < epi[b]


# ---------------------------------------------------------------- reproduce


def test_reproduce_sotea_no_inheritance():
    state = make_structured_state([0.5, 0.4, 0.3, 0.2], [(0, 1), (0, 2), (0, 3)])
    state.config = EaConfig(variant="sotea", fitness_mode="epistatic", m=4, generations=1,
                            n=8, k_nk=0, p_add=0.0, p_remove=0.0, seed=1)
    child = reproduce_sotea(state, 0)
    assert state.graph.degree(child) == 1
    assert state.graph.degree(0) == 4
    assert state.population[child].birth_generation == 1


def test_reproduce_sotea_full_transfer():
    state = make_structured_state([0.5, 0.4, 0.3, 0.2], [(0, 1), (0, 2), (0, 3)])
    state.config = EaConfig(variant="sotea", fitness_mode="epistatic", m=4, generations=1,
                            n=8, k_nk=0, p_add=1.0, p_remove=1.0, seed=1)
    child = reproduce_sotea(state, 0)
    assert sorted(state.graph.neighbors(child)) == [0, 1, 2, 3]
    assert sorted(state.graph.neighbors(0)) == [child]
    state.graph.audit()


def test_reproduce_sotea_expected_offspring_degree():
    p_add = 0.1
    trials = 30_000
    total = 0
    state = make_structured_state([0.5, 0.4, 0.3, 0.2, 0.1, 0.05], [(0, i) for i in range(1, 6)])
    base_edges = [(0, i) for i in range(1, 6)]
    state.config = EaConfig(variant="sotea", fitness_mode="epistatic", m=6, generations=1,
                            n=8, k_nk=0, p_add=p_add, p_remove=p_add, seed=1)
    for _ in range(trials):
        child = reproduce_sotea(state, 0)
        total += state.graph.degree(child)
        # undo: drop the child and restore parent edges
        state.graph.remove_node(child)
        state._remove_individual(child)
        for a, b in base_edges:
            state.graph.add_edge(a, b)
    assert total / trials == pytest.approx(1 + p_add * 5, abs=0.02)


def test_reproduce_cellular_grows_cycle():
    state = make_run_state(variant="cellular", m=5)
    child = reproduce_cellular(state, 2)
    assert len(state.population) == 6
    assert all(state.graph.degree(v) == 2 for v in state.graph.nodes())
    assert state.graph.degree(child) == 2
    from sotea.network import network_stats

    assert network_stats(state.graph).component_count == 1


def test_reproduce_cellular_repeated_keeps_degrees():
    state = make_run_state(variant="cellular", m=8)
    for parent in list(state.population):
        reproduce_cellular(state, parent)
    assert all(state.graph.degree(v) == 2 for v in state.graph.nodes())
    state.graph.audit()


def test_reproduce_cellular_requires_edges():
    state = make_structured_state([0.5, 0.4, 0.3], [])
    state.config = EaConfig(variant="cellular", fitness_mode="epistatic", m=3, generations=1,
                            n=8, k_nk=0, seed=1)
    with pytest.raises(ValueError):
        reproduce_cellular(state, 0)


def test_reproduce_panmictic_grows_population():
    state = make_run_state(variant="panmictic", m=10)
    child = reproduce_panmictic(state, 3)
    assert len(state.population) == 11
    assert state.population[child].objective == state.landscape.evaluate(state.population[child].genome)
    with pytest.raises(KeyError):
        reproduce_panmictic(state, 424242)


def test_offspring_mutation_distance_is_binomial_mean():
    state = make_run_state(variant="panmictic", m=10, n=10)
    parent = state.population[0]
    diffs = 0
    trials = 20_000
    for _ in range(trials):
        child = reproduce_panmictic(state, 0)
        diffs += int(np.count_nonzero(state.population[child].genome != parent.genome))
        state._remove_individual(child)
    assert diffs / trials == pytest.approx(1.0, abs=0.05)


# ---------------------------------------------------------------- compete


def test_compete_structured_kills_worst_neighbor():
    state = make_structured_state([0.9, 0.2, 0.5], [(0, 1), (0, 2), (1, 2)])
    survivor = compete_structured(state, 0, "raw")
    assert survivor == 0
    assert 1 not in state.population
    assert 1 not in state.graph
    assert state.graph.has_edge(0, 2)


def test_compete_structured_selected_can_die():
    state = make_structured_state([0.1, 0.4, 0.5], [(0, 1), (0, 2), (1, 2)])
    survivor = compete_structured(state, 0, "raw")
    assert survivor == 1
    assert 0 not in state.population


def test_compete_structured_isolated_is_noop():
    state = make_structured_state([0.1, 0.4, 0.5], [(1, 2)])
    assert compete_structured(state, 0, "raw") == 0
    assert len(state.population) == 3


def test_compete_structured_equal_fitness_kills_younger():
    state = make_structured_state([0.4, 0.4, 0.4], [(0, 1), (1, 2), (0, 2)])
    before = len(state.population)
    survivor = compete_structured(state, 1, "raw")
    assert len(state.population) == before - 1
    # challenger drawn among {0, 2}; equal raw fitness, so the younger of
    # the contest pair dies: if challenger was 0, node 1 dies; else node 2
    assert survivor in (0, 1)


def test_compete_structured_winner_inherits_links():
    state = make_structured_state([0.9, 0.2, 0.5, 0.6], [(0, 1), (1, 2), (1, 3)])
    survivor = compete_structured(state, 0, "raw")
    assert survivor == 0
    assert sorted(state.graph.neighbors(0)) == [2, 3]


def test_compete_panmictic_two_individuals():
    state = make_panmictic_state([0.3, 0.7])
    survivor = compete_panmictic(state, 0)
    assert survivor == 1
    assert 0 not in state.population
    assert len(state.population) == 1


def test_compete_panmictic_never_self():
    for seed in range(30):
        state = make_panmictic_state([0.5, 0.5, 0.5], seed=seed)
        state.rng = Xoshiro256(seed)
        survivor = compete_panmictic(state, 1)
        assert len(state.population) == 2


def test_compete_panmictic_requires_two():
    state = make_panmictic_state([0.5])
    with pytest.raises(ValueError):
        compete_panmictic(state, 0)


def test_compete_panmictic_death_rate_matches_tournament():
    # one elimination event: P(x dies) = 2 * (# better than x) / (P * (P - 1))
    objs = [0.1, 0.3, 0.5, 0.7, 0.9]
    p = len(objs)
    trials = 20_000
    deaths = {i: 0 for i in range(p)}
    for t in range(trials):
        state = make_panmictic_state(objs)
        state.rng = Xoshiro256(t)
        pool = list(state.population)
        selected = pool[state.rng.bounded(len(pool))]
        compete_panmictic(state, selected)
        (dead,) = set(range(p)) - set(state.population)
        deaths[dead] += 1
    for i, obj in enumerate(objs):
        better = sum(1 for o in objs if o > obj)
        expected = 2 * better / (p * (p - 1))
        assert deaths[i] / trials == pytest.approx(expected, abs=0.02)


# ---------------------------------------------------------------- generations


def test_generation_restores_population_size():
    for variant in ("panmictic", "cellular", "sotea"):
        state = make_run_state(variant=variant, m=15)
        run_generation(state)
        assert len(state.population) == 15
        assert state.generation == 1
        if state.graph is not None:
            assert sorted(state.population) == sorted(state.graph.nodes())


def test_cellular_stays_a_cycle_over_generations():
    from sotea.network import network_stats

    state = make_run_state(variant="cellular", m=10)
    for _ in range(30):
        run_generation(state)
        state.graph.audit()
        assert all(state.graph.degree(v) == 2 for v in state.graph.nodes())
        assert network_stats(state.graph).component_count == 1


def test_run_is_deterministic():
    cfg = small_config(variant="sotea", m=14, generations=25)
    a = run(cfg, engine="python", trace=True)
    b = run(cfg, engine="python", trace=True)
    assert np.array_equal(a.record.diversity_full, b.record.diversity_full, equal_nan=True)
    assert np.array_equal(a.trace["death"], b.trace["death"])


def test_variants_share_init_stream():
    scape_seed = derive_seed(123, 0)
    configs = [small_config(variant=v, seed=123, m=10) for v in ("panmictic", "sotea")]
    states = [init(c, NkLandscape.generate(c.n, c.k_nk, scape_seed)) for c in configs]
    for i in range(10):
        assert np.array_equal(states[0].population[i].genome, states[1].population[i].genome)
    # but dynamics diverge
    results = [run(c, metric_stride=20) for c in configs]
    assert not np.array_equal(
        results[0].record.mean_objective, results[1].record.mean_objective
    )


def test_zero_generations_records_initial_state_only():
    cfg = small_config(generations=0)
    result = run(cfg)
    assert list(result.record.generations) == [0]
    assert result.final_state.generation == 0


def test_long_run_completes_and_tracks_best():
    cfg = EaConfig(variant="panmictic", fitness_mode="raw", m=30, generations=300,
                   n=30, k_nk=14, seed=9)
    result = run(cfg, metric_stride=50)
    assert result.record.best_objective[-1] > result.record.best_objective[0]
    assert len(result.final_state.population) == 30


def test_record_generation_policy():
    assert list(record_generations(10, 3)) == [0, 3, 6, 9, 10]
    assert list(record_generations(0, 1)) == [0]
    assert list(record_generations(6, 2)) == [0, 2, 4, 6]
    with pytest.raises(ValueError):
        record_generations(5, 0)


def test_birth_generation_stamps():
    state = make_run_state(variant="sotea", m=10)
    run_generation(state)
    run_generation(state)
    births = {ind.birth_generation for ind in state.population.values()}
    assert births <= {0, 1, 2}
    assert state.next_id == 10 + 2 * 10


def test_isolated_retry_counter_visible():
    cfg = small_config(variant="sotea", m=10, generations=40, seed=5)
    result = run(cfg, engine="python", metric_stride=40)
    assert result.meta["isolated_retries"] >= 0

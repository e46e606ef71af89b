"""Fast self-check oracles: independent recomputations of core results.

Each check recomputes a result through a deliberately different route
(brute force, closed form, enumeration) and compares exactly. The
equivalence check runs the pure-Python engine so that a corrupted rule
in `sotea.engine` is actually exercised.
"""

from __future__ import annotations

import numpy as np

from . import analysis, engine
from .landscape import NkLandscape
from .network import network_stats, new_ring
from .rng import Xoshiro256, derive_seed


def check_diversity_brute_force() -> tuple[bool, str]:
    """analysis.diversity against the ordered double loop, Eq-style."""
    rng = Xoshiro256(1101)
    for trial in range(50):
        m = 2 + rng.bounded(19)
        n = 1 + rng.bounded(24)
        genomes = [np.array([rng.next_u64() & 1 for _ in range(n)], dtype=np.uint8) for _ in range(m)]
        total = 0
        for i in range(m):
            for j in range(m):
                if i != j:
                    total += int(np.count_nonzero(genomes[i] != genomes[j]))
        expected = total / (m * (m - 1) * n / 2)
        got = analysis.diversity(genomes)
        if got != expected:
            return False, f"trial {trial}: diversity {got!r} != oracle {expected!r}"
    identical = [np.zeros(8, dtype=np.uint8)] * 4
    if analysis.diversity(identical) != 0.0:
        return False, "all-identical population must score 0"
    pair = [np.zeros(6, dtype=np.uint8), np.ones(6, dtype=np.uint8)]
    if analysis.diversity(pair) != 2.0:
        return False, "complementary pair must score 2.0"
    return True, "50 random populations + degenerate cases"


def check_ring_path_length() -> tuple[bool, str]:
    """Even-cycle closed form M^2 / (4(M-1)) against BFS stats."""
    for m in range(4, 41, 2):
        expected = m * m / (4 * (m - 1))
        got = network_stats(new_ring(m)).char_path_length
        if got != expected:
            return False, f"ring M={m}: L {got!r} != {expected!r}"
    return True, "even rings M=4..40 match the closed form exactly"


def check_nk_enumeration() -> tuple[bool, str]:
    """Full-genome-space evaluation against pattern rebuilding by string."""
    for n, k, seed in ((8, 0, 5), (8, 2, 6), (10, 3, 7)):
        scape = NkLandscape.generate(n, k, seed)
        for value in range(1 << n):
            genome = np.array([(value >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)
            acc = 0.0
            for i in range(n):
                bits = str(genome[i]) + "".join(str(genome[z]) for z in scape.wiring[i])
                acc += scape.tables[i, int(bits, 2)]
            if scape.evaluate(genome) != acc / n:
                return False, f"(n={n},k={k},seed={seed}) genome {value:0{n}b} mismatch"
    return True, "all genomes on 3 small instances match the string oracle"


def check_panmictic_equivalence() -> tuple[bool, str]:
    """Raw and epistatic modes must eliminate identically, panmictic."""
    results = []
    for mode in ("epistatic", "raw"):
        cfg = engine.EaConfig(
            variant="panmictic", fitness_mode=mode, m=30, generations=80,
            n=20, k_nk=3, seed=4242,
        )
        results.append(engine.run(cfg, metric_stride=80, engine="python", trace=True))
    dead_epi = results[0].trace["death"]
    dead_raw = results[1].trace["death"]
    if not np.array_equal(dead_epi, dead_raw):
        first = int(np.argmax(dead_epi != dead_raw))
        return False, f"elimination sequences diverge at event {first}"
    pop_epi = results[0].final_state.population
    pop_raw = results[1].final_state.population
    if sorted(pop_epi) != sorted(pop_raw):
        return False, "final population ids differ"
    for i in pop_epi:
        if not np.array_equal(pop_epi[i].genome, pop_raw[i].genome):
            return False, f"final genome of {i} differs"
    return True, "identical eliminations and final population over 80 generations"


CHECKS = [
    ("diversity-brute-force", check_diversity_brute_force),
    ("ring-path-length", check_ring_path_length),
    ("nk-enumeration", check_nk_enumeration),
    ("panmictic-equivalence", check_panmictic_equivalence),
]


def run_all(out=print) -> bool:
    ok = True
    for name, check in CHECKS:
        passed, detail = check()
        ok = ok and passed
        out(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return ok

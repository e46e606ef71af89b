# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulation kernel: landscape construction plus the run loop.

This module mirrors, draw for draw, the contract documented in
``sotea.engine`` and ``sotea.rng``; the test suite locks the two
implementations together on full runs. Keep any behavioral change in
sync with the pure-Python engine.
"""

from libc.math cimport ceil, NAN
from libc.stdint cimport uint64_t, int64_t, int32_t, uint8_t

import numpy as np

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define sotea_popcount64(x) __builtin_popcountll(x)
    #else
    static int sotea_popcount64(unsigned long long x) {
        x = x - ((x >> 1) & 0x5555555555555555ULL);
        x = (x & 0x3333333333333333ULL) + ((x >> 2) & 0x3333333333333333ULL);
        x = (x + (x >> 4)) & 0x0f0f0f0f0f0f0f0fULL;
        return (int)((x * 0x0101010101010101ULL) >> 56);
    }
    #endif
    """
    int sotea_popcount64(uint64_t x) nogil


cdef enum:
    VARIANT_PANMICTIC = 0
    VARIANT_CELLULAR = 1
    VARIANT_SOTEA = 2
    MODE_RAW = 0
    MODE_EPISTATIC = 1


# ---------------------------------------------------------------------------
# xoshiro256** and splitmix64 derivation (see sotea.rng)
# ---------------------------------------------------------------------------

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double DOUBLE_SCALE = 1.0 / 9007199254740992.0  # 2**-53

cdef struct Rng:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t _rotl(uint64_t x, int r) noexcept nogil:
    return (x << r) | (x >> (64 - r))


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _derive(uint64_t seed, uint64_t stream) noexcept nogil:
    return _mix64(seed + (stream + 1) * GOLDEN)


cdef inline void rng_seed(Rng* rng, uint64_t seed) noexcept nogil:
    cdef uint64_t state = seed
    state += GOLDEN
    rng.s0 = _mix64(state)
    state += GOLDEN
    rng.s1 = _mix64(state)
    state += GOLDEN
    rng.s2 = _mix64(state)
    state += GOLDEN
    rng.s3 = _mix64(state)
    if (rng.s0 | rng.s1 | rng.s2 | rng.s3) == 0:
        rng.s0 = GOLDEN


cdef inline uint64_t rng_next(Rng* rng) noexcept nogil:
    cdef uint64_t result = _rotl(rng.s1 * 5ULL, 7) * 9ULL
    cdef uint64_t t = rng.s1 << 17
    rng.s2 ^= rng.s0
    rng.s3 ^= rng.s1
    rng.s1 ^= rng.s2
    rng.s0 ^= rng.s3
    rng.s2 ^= t
    rng.s3 = _rotl(rng.s3, 45)
    return result


cdef inline double rng_double(Rng* rng) noexcept nogil:
    return (rng_next(rng) >> 11) * DOUBLE_SCALE


cdef inline uint64_t rng_bounded(Rng* rng, uint64_t n) noexcept nogil:
    # threshold = 2**64 % n, written in wrapping arithmetic
    cdef uint64_t threshold = (0ULL - n) % n
    cdef uint64_t x
    while True:
        x = rng_next(rng)
        if x >= threshold:
            return x % n


def rng_selftest(object seed, int count, str kind, object bound=None):
    """Raw draw sequences so tests can lock this RNG to the Python one."""
    cdef Rng rng
    rng_seed(&rng, <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef int i
    if kind == "u64":
        out_u = np.empty(count, dtype=np.uint64)
        for i in range(count):
            out_u[i] = rng_next(&rng)
        return out_u
    if kind == "double":
        out_d = np.empty(count, dtype=np.float64)
        for i in range(count):
            out_d[i] = rng_double(&rng)
        return out_d
    if kind == "bounded":
        out_b = np.empty(count, dtype=np.uint64)
        for i in range(count):
            out_b[i] = rng_bounded(&rng, <uint64_t> int(bound))
        return out_b
    raise ValueError(f"unknown kind {kind!r}")


def derive_seed_c(object seed, object stream):
    return int(_derive(<uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF), <uint64_t> int(stream)))


# ---------------------------------------------------------------------------
# landscape construction
# ---------------------------------------------------------------------------

def generate_landscape_arrays(int n, int k, object seed):
    """Wiring and tables for (n, k, seed); identical to the Python path."""
    cdef Rng rng
    rng_seed(&rng, <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF))
    wiring_arr = np.empty((n, k), dtype=np.int64)
    tables_arr = np.empty((n, 1 << (k + 1)), dtype=np.float64)
    cdef int64_t[:, ::1] wiring = wiring_arr
    cdef double[:, ::1] tables = tables_arr
    cdef int i, cnt, t, entries = 1 << (k + 1)
    cdef uint64_t c
    cdef bint dup
    for i in range(n):
        cnt = 0
        while cnt < k:
            c = rng_bounded(&rng, <uint64_t> n)
            if <int> c == i:
                continue
            dup = False
            for t in range(cnt):
                if wiring[i, t] == <int64_t> c:
                    dup = True
                    break
            if dup:
                continue
            wiring[i, cnt] = <int64_t> c
            cnt += 1
        for t in range(entries):
            tables[i, t] = rng_double(&rng)
    return wiring_arr, tables_arr


# ---------------------------------------------------------------------------
# simulation state
# ---------------------------------------------------------------------------

cdef class _Sim:
    cdef int variant, mode, m, n, k, cap, words
    cdef double mutation_rate, p_add, p_remove, top_frac
    cdef uint64_t seed
    cdef Rng rng

    cdef object wiring_arr, tables_arr
    cdef int64_t[:, ::1] wiring
    cdef double[:, ::1] tables

    cdef uint64_t[:, ::1] genw
    cdef double[:] obj
    cdef int64_t[:] node_id
    cdef int64_t[:] birth

    cdef int32_t[:, ::1] adj
    cdef int32_t[:] deg
    cdef int64_t edge_count

    cdef int32_t[:] live
    cdef int live_count
    cdef int32_t[:] free_slots
    cdef int free_count

    cdef int64_t next_id
    cdef int64_t generation
    cdef int64_t isolated_retries

    # record arrays
    cdef object rec_best_arr, rec_mean_arr, rec_divf_arr, rec_divt_arr
    cdef object rec_len_arr, rec_kave_arr, rec_comp_arr
    cdef double[:] rec_best, rec_mean, rec_divf, rec_divt, rec_len, rec_kave
    cdef int64_t[:] rec_comp

    # trace arrays
    cdef bint trace_on
    cdef object trace_parent_arr, trace_child_arr, trace_death_arr
    cdef int64_t[:] trace_parent, trace_child, trace_death
    cdef int64_t trace_births, trace_deaths

    # scratch
    cdef int32_t[:] nbuf
    cdef int32_t[:] tiebuf
    cdef int32_t[:] selbuf
    cdef int32_t[:] parents
    cdef int32_t[:] bfs_queue
    cdef int64_t[:] bfs_dist
    cdef int64_t[:] bfs_mark
    cdef int64_t bfs_stamp

    def __cinit__(self, int variant, int mode, int m, int n, int k,
                  double mutation_rate, double p_add, double p_remove,
                  uint64_t seed, double top_frac):
        self.variant = variant
        self.mode = mode
        self.m = m
        self.n = n
        self.k = k
        self.mutation_rate = mutation_rate
        self.p_add = p_add
        self.p_remove = p_remove
        self.seed = seed
        self.top_frac = top_frac
        self.cap = 2 * m + 2
        self.words = (n + 63) >> 6

        self.wiring_arr, self.tables_arr = generate_landscape_arrays(n, k, int(_derive(seed, 0)))
        self.wiring = self.wiring_arr
        self.tables = self.tables_arr

        cdef int cap = self.cap
        self.genw = np.zeros((cap, self.words), dtype=np.uint64)
        self.obj = np.zeros(cap, dtype=np.float64)
        self.node_id = np.zeros(cap, dtype=np.int64)
        self.birth = np.zeros(cap, dtype=np.int64)
        self.adj = np.zeros((cap, cap), dtype=np.int32)
        self.deg = np.zeros(cap, dtype=np.int32)
        self.live = np.zeros(cap, dtype=np.int32)
        self.free_slots = np.zeros(cap, dtype=np.int32)
        self.nbuf = np.zeros(cap, dtype=np.int32)
        self.tiebuf = np.zeros(cap, dtype=np.int32)
        self.selbuf = np.zeros(cap, dtype=np.int32)
        self.parents = np.zeros(cap, dtype=np.int32)
        self.bfs_queue = np.zeros(cap, dtype=np.int32)
        self.bfs_dist = np.zeros(cap, dtype=np.int64)
        self.bfs_mark = np.zeros(cap, dtype=np.int64)
        self.bfs_stamp = 0
        self.edge_count = 0
        self.live_count = 0
        self.free_count = 0
        self.next_id = 0
        self.generation = 0
        self.isolated_retries = 0
        self.trace_on = False
        self.trace_births = 0
        self.trace_deaths = 0

    # -- genome helpers -----------------------------------------------------

    cdef inline int bit(self, int slot, int j) noexcept nogil:
        return <int> ((self.genw[slot, j >> 6] >> (j & 63)) & 1ULL)

    cdef double eval_nk(self, int slot) noexcept nogil:
        cdef double acc = 0.0
        cdef int i, j, idx
        cdef int k = self.k
        for i in range(self.n):
            idx = self.bit(slot, i) << k
            for j in range(k):
                idx |= self.bit(slot, <int> self.wiring[i, j]) << (k - 1 - j)
            acc += self.tables[i, idx]
        return acc / self.n

    # -- graph helpers ------------------------------------------------------

    cdef inline bint edge_exists(self, int a, int b) noexcept nogil:
        cdef int t
        for t in range(self.deg[a]):
            if self.adj[a, t] == b:
                return True
        return False

    cdef bint add_edge(self, int a, int b) noexcept nogil:
        if a == b or self.edge_exists(a, b):
            return False
        self.adj[a, self.deg[a]] = b
        self.deg[a] += 1
        self.adj[b, self.deg[b]] = a
        self.deg[b] += 1
        self.edge_count += 1
        return True

    cdef void _drop_half_edge(self, int a, int b) noexcept nogil:
        cdef int t
        for t in range(self.deg[a]):
            if self.adj[a, t] == b:
                self.deg[a] -= 1
                self.adj[a, t] = self.adj[a, self.deg[a]]
                return

    cdef bint remove_edge(self, int a, int b) noexcept nogil:
        if not self.edge_exists(a, b):
            return False
        self._drop_half_edge(a, b)
        self._drop_half_edge(b, a)
        self.edge_count -= 1
        return True

    cdef void transfer_links(self, int winner, int loser) noexcept nogil:
        """Winner absorbs the loser's links; all loser edges removed."""
        cdef int d = self.deg[loser]
        cdef int t, x
        for t in range(d):
            self.nbuf[t] = self.adj[loser, t]
        for t in range(d):
            x = self.nbuf[t]
            if x != winner:
                self.add_edge(winner, x)
        for t in range(d):
            self._drop_half_edge(self.nbuf[t], loser)
        self.edge_count -= d
        self.deg[loser] = 0

    cdef void sort_slots_by_id(self, int32_t[:] buf, int cnt) noexcept nogil:
        cdef int i, j
        cdef int32_t v
        for i in range(1, cnt):
            v = buf[i]
            j = i - 1
            while j >= 0 and self.node_id[buf[j]] > self.node_id[v]:
                buf[j + 1] = buf[j]
                j -= 1
            buf[j + 1] = v

    # -- fitness --------------------------------------------------------------

    cdef inline bint _outranks(self, int other, int slot, double o) noexcept nogil:
        # seniority order: higher objective, or equal and born earlier
        if self.obj[other] != o:
            return self.obj[other] > o
        return self.node_id[other] < self.node_id[slot]

    cdef inline int _tie_loser(self, int sel, int other) noexcept nogil:
        # equal effective fitness: the younger contestant dies
        return sel if self.node_id[sel] > self.node_id[other] else other

    cdef double effective(self, int slot) noexcept nogil:
        cdef int d, t, b
        cdef double o
        if self.mode == MODE_RAW:
            return self.obj[slot]
        o = self.obj[slot]
        b = 0
        if self.variant == VARIANT_PANMICTIC:
            d = self.live_count - 1
            if d == 0:
                return 1.0
            for t in range(self.live_count):
                if self.live[t] != slot and self._outranks(self.live[t], slot, o):
                    b += 1
        else:
            d = self.deg[slot]
            if d == 0:
                return 1.0
            for t in range(d):
                if self._outranks(self.adj[slot, t], slot, o):
                    b += 1
        return (<double> (d - b)) / (<double> d)

    # -- population bookkeeping ------------------------------------------------

    cdef int alloc_slot(self) noexcept nogil:
        self.free_count -= 1
        return self.free_slots[self.free_count]

    cdef void remove_live(self, int slot) noexcept nogil:
        cdef int t, pos = 0
        for t in range(self.live_count):
            if self.live[t] == slot:
                pos = t
                break
        self.live_count -= 1
        for t in range(pos, self.live_count):
            self.live[t] = self.live[t + 1]
        self.free_slots[self.free_count] = slot
        self.free_count += 1

    # -- initialization ----------------------------------------------------------

    def init_population(self):
        cdef Rng rng
        rng_seed(&rng, _derive(self.seed, 1))
        cdef int i, j, w, s
        for i in range(self.m):
            for w in range(self.words):
                self.genw[i, w] = 0
            for j in range(self.n):
                if rng_next(&rng) & 1ULL:
                    self.genw[i, j >> 6] |= 1ULL << (j & 63)
            self.node_id[i] = i
            self.birth[i] = 0
            self.obj[i] = self.eval_nk(i)
            self.live[i] = i
        self.live_count = self.m
        self.next_id = self.m
        self.free_count = 0
        for s in range(self.cap - 1, self.m - 1, -1):
            self.free_slots[self.free_count] = s
            self.free_count += 1
        if self.variant != VARIANT_PANMICTIC:
            for i in range(self.m):
                self.add_edge(i, (i + 1) % self.m)

    def setup_records(self, int rows):
        self.rec_best_arr = np.full(rows, np.nan)
        self.rec_mean_arr = np.full(rows, np.nan)
        self.rec_divf_arr = np.full(rows, np.nan)
        self.rec_divt_arr = np.full(rows, np.nan)
        self.rec_len_arr = np.full(rows, np.nan)
        self.rec_kave_arr = np.full(rows, np.nan)
        self.rec_comp_arr = np.full(rows, -1, dtype=np.int64)
        self.rec_best = self.rec_best_arr
        self.rec_mean = self.rec_mean_arr
        self.rec_divf = self.rec_divf_arr
        self.rec_divt = self.rec_divt_arr
        self.rec_len = self.rec_len_arr
        self.rec_kave = self.rec_kave_arr
        self.rec_comp = self.rec_comp_arr

    def setup_trace(self, int64_t events):
        self.trace_on = True
        self.trace_parent_arr = np.zeros(events, dtype=np.int64)
        self.trace_child_arr = np.zeros(events, dtype=np.int64)
        self.trace_death_arr = np.zeros(events, dtype=np.int64)
        self.trace_parent = self.trace_parent_arr
        self.trace_child = self.trace_child_arr
        self.trace_death = self.trace_death_arr

    # -- generation phases ---------------------------------------------------------

    cdef int spawn(self, int parent_slot) noexcept nogil:
        """Mutated clone of the parent; returns the child's slot."""
        cdef int slot = self.alloc_slot()
        cdef int w, j
        for w in range(self.words):
            self.genw[slot, w] = self.genw[parent_slot, w]
        for j in range(self.n):
            if rng_double(&self.rng) < self.mutation_rate:
                self.genw[slot, j >> 6] ^= 1ULL << (j & 63)
        self.node_id[slot] = self.next_id
        self.next_id += 1
        self.birth[slot] = self.generation + 1
        self.deg[slot] = 0
        self.obj[slot] = self.eval_nk(slot)
        self.live[self.live_count] = slot
        self.live_count += 1
        return slot

    cdef int reproduction_phase(self) except -1:
        rng_seed(&self.rng, _derive(self.seed, <uint64_t> (2 * (self.generation + 1))))
        cdef int e, t, child, parent_slot, x, d, idx
        cdef int m = self.m
        for t in range(m):
            self.parents[t] = self.live[t]
        for e in range(m):
            parent_slot = self.parents[rng_bounded(&self.rng, <uint64_t> m)]
            # snapshot of pre-existing edges, ascending id
            d = self.deg[parent_slot]
            for t in range(d):
                self.nbuf[t] = self.adj[parent_slot, t]
            self.sort_slots_by_id(self.nbuf, d)
            if self.variant == VARIANT_CELLULAR and d == 0:
                raise RuntimeError("cellular parent with no edges; ring invariant broken")
            # nbuf survives spawn: spawn touches genomes and live only
            child = self.spawn(parent_slot)
            if self.trace_on:
                self.trace_parent[self.trace_births] = self.node_id[parent_slot]
                self.trace_child[self.trace_births] = self.node_id[child]
                self.trace_births += 1
            if self.variant == VARIANT_CELLULAR:
                idx = <int> rng_bounded(&self.rng, <uint64_t> d)
                x = self.nbuf[idx]
                self.remove_edge(parent_slot, x)
                self.add_edge(child, x)
                self.add_edge(child, parent_slot)
            elif self.variant == VARIANT_SOTEA:
                self.add_edge(child, parent_slot)
                for t in range(d):
                    x = self.nbuf[t]
                    if rng_double(&self.rng) < self.p_add:
                        self.add_edge(child, x)
                        if rng_double(&self.rng) < self.p_remove:
                            self.remove_edge(parent_slot, x)
        return 0

    cdef int competition_phase(self) except -1:
        rng_seed(&self.rng, _derive(self.seed, <uint64_t> (2 * (self.generation + 1) + 1)))
        cdef int deaths = 0, m = self.m
        cdef int si, oi, sel, opponent, d, t, tie_count, challenger, loser, winner, x
        cdef double worst, f, f_self
        while deaths < m:
            si = <int> rng_bounded(&self.rng, <uint64_t> self.live_count)
            sel = self.live[si]
            if self.variant == VARIANT_PANMICTIC:
                oi = <int> rng_bounded(&self.rng, <uint64_t> (self.live_count - 1))
                if oi >= si:
                    oi += 1
                opponent = self.live[oi]
                f_self = self.effective(sel)
                f = self.effective(opponent)
                if f_self > f:
                    loser = opponent
                elif f_self < f:
                    loser = sel
                else:
                    loser = self._tie_loser(sel, opponent)
                if self.trace_on:
                    self.trace_death[self.trace_deaths] = self.node_id[loser]
                    self.trace_deaths += 1
                self.remove_live(loser)
                deaths += 1
                continue
            d = self.deg[sel]
            if d == 0:
                self.isolated_retries += 1
                if self.edge_count == 0:
                    raise RuntimeError(
                        "every living individual is isolated; competition cannot "
                        "reduce the population back to M"
                    )
                continue
            for t in range(d):
                self.nbuf[t] = self.adj[sel, t]
            self.sort_slots_by_id(self.nbuf, d)
            worst = 2.0  # fitness values never exceed 1
            tie_count = 0
            for t in range(d):
                x = self.nbuf[t]
                f = self.effective(x)
                if f < worst:
                    worst = f
                    self.tiebuf[0] = x
                    tie_count = 1
                elif f == worst:
                    self.tiebuf[tie_count] = x
                    tie_count += 1
            if tie_count > 1:
                challenger = self.tiebuf[rng_bounded(&self.rng, <uint64_t> tie_count)]
            else:
                challenger = self.tiebuf[0]
            f_self = self.effective(sel)
            if f_self > worst:
                loser = challenger
            elif f_self < worst:
                loser = sel
            else:
                loser = self._tie_loser(sel, challenger)
            winner = challenger if loser == sel else sel
            self.transfer_links(winner, loser)
            if self.trace_on:
                self.trace_death[self.trace_deaths] = self.node_id[loser]
                self.trace_deaths += 1
            self.remove_live(loser)
            deaths += 1
        return 0

    # -- measurements ------------------------------------------------------------

    cdef int64_t pair_hamming_total(self, int32_t[:] slots, int cnt) noexcept nogil:
        cdef int64_t total = 0
        cdef int a, b, w
        for a in range(cnt):
            for b in range(a + 1, cnt):
                for w in range(self.words):
                    total += sotea_popcount64(self.genw[slots[a], w] ^ self.genw[slots[b], w])
        return total

    cdef double diversity_all(self) noexcept nogil:
        cdef int64_t total = self.pair_hamming_total(self.live, self.live_count)
        cdef int64_t denom = (<int64_t> self.live_count) * (self.live_count - 1) * self.n // 2
        return (<double> (2 * total)) / (<double> denom)

    cdef double diversity_top(self) noexcept nogil:
        cdef int p = self.live_count
        cdef int h = <int> ceil(self.top_frac * p)
        if h < 2:
            return NAN
        cdef int t, u, best_u, a, b
        cdef int32_t tmp
        for t in range(p):
            self.selbuf[t] = self.live[t]
        # partial selection sort by (objective desc, id asc)
        for t in range(h):
            best_u = t
            for u in range(t + 1, p):
                a = self.selbuf[u]
                b = self.selbuf[best_u]
                if self.obj[a] > self.obj[b] or (self.obj[a] == self.obj[b] and self.node_id[a] < self.node_id[b]):
                    best_u = u
            tmp = self.selbuf[t]
            self.selbuf[t] = self.selbuf[best_u]
            self.selbuf[best_u] = tmp
        cdef int64_t total = self.pair_hamming_total(self.selbuf, h)
        cdef int64_t denom = (<int64_t> h) * (h - 1) * self.n // 2
        return (<double> (2 * total)) / (<double> denom)

    cdef void network_measures(self, double* length_out, double* kave_out, int64_t* comps_out) noexcept nogil:
        cdef int64_t dist_sum = 0, pair_count = 0, degree_total = 0, comps = 0
        cdef int t, u, src, v, w, head, tail
        cdef int64_t dv
        for t in range(self.live_count):
            src = self.live[t]
            self.bfs_stamp += 1
            self.bfs_mark[src] = self.bfs_stamp
            self.bfs_dist[src] = 0
            self.bfs_queue[0] = src
            head = 0
            tail = 1
            while head < tail:
                v = self.bfs_queue[head]
                head += 1
                dv = self.bfs_dist[v]
                for u in range(self.deg[v]):
                    w = self.adj[v, u]
                    if self.bfs_mark[w] != self.bfs_stamp:
                        self.bfs_mark[w] = self.bfs_stamp
                        self.bfs_dist[w] = dv + 1
                        self.bfs_queue[tail] = w
                        tail += 1
                dist_sum += dv
                pair_count += 1
            pair_count -= 1  # the source does not pair with itself
        self.bfs_stamp += 1
        for t in range(self.live_count):
            src = self.live[t]
            if self.bfs_mark[src] == self.bfs_stamp:
                continue
            comps += 1
            self.bfs_mark[src] = self.bfs_stamp
            self.bfs_queue[0] = src
            head = 0
            tail = 1
            while head < tail:
                v = self.bfs_queue[head]
                head += 1
                for u in range(self.deg[v]):
                    w = self.adj[v, u]
                    if self.bfs_mark[w] != self.bfs_stamp:
                        self.bfs_mark[w] = self.bfs_stamp
                        self.bfs_queue[tail] = w
                        tail += 1
        for t in range(self.live_count):
            degree_total += self.deg[self.live[t]]
        length_out[0] = (<double> dist_sum) / (<double> pair_count) if pair_count > 0 else NAN
        kave_out[0] = (<double> degree_total) / (<double> self.live_count)
        comps_out[0] = comps

    def measure_at(self, int i, bint want_network):
        cdef double bv, ac = 0.0
        cdef int t, slot
        cdef double l_out = NAN, k_out = NAN
        cdef int64_t c_out = -1
        bv = self.obj[self.live[0]]
        for t in range(self.live_count):
            slot = self.live[t]
            if self.obj[slot] > bv:
                bv = self.obj[slot]
            ac += self.obj[slot]
        self.rec_best[i] = bv
        self.rec_mean[i] = ac / self.live_count
        self.rec_divf[i] = self.diversity_all() if self.live_count >= 2 else NAN
        self.rec_divt[i] = self.diversity_top()
        if want_network and self.variant != VARIANT_PANMICTIC:
            self.network_measures(&l_out, &k_out, &c_out)
            self.rec_len[i] = l_out
            self.rec_kave[i] = k_out
            self.rec_comp[i] = c_out

    def degree_histogram_dict(self):
        cdef int t, d
        counts = {}
        if self.variant == VARIANT_PANMICTIC:
            counts[self.live_count - 1] = self.live_count
        else:
            for t in range(self.live_count):
                d = self.deg[self.live[t]]
                counts[d] = counts.get(d, 0) + 1
        return counts

    def step_generation(self):
        self.reproduction_phase()
        self.competition_phase()
        self.generation += 1

    def export_state(self):
        cdef int p = self.live_count
        ids_arr = np.empty(p, dtype=np.int64)
        birth_arr = np.empty(p, dtype=np.int64)
        obj_arr = np.empty(p, dtype=np.float64)
        genomes_arr = np.empty((p, self.n), dtype=np.uint8)
        cdef int64_t[:] ids_v = ids_arr
        cdef int64_t[:] birth_v = birth_arr
        cdef double[:] obj_v = obj_arr
        cdef uint8_t[:, ::1] genomes_v = genomes_arr
        cdef int t, j, u, slot
        for t in range(p):
            slot = self.live[t]
            ids_v[t] = self.node_id[slot]
            birth_v[t] = self.birth[slot]
            obj_v[t] = self.obj[slot]
            for j in range(self.n):
                genomes_v[t, j] = <uint8_t> self.bit(slot, j)
        edges_list = []
        if self.variant != VARIANT_PANMICTIC:
            for t in range(p):
                slot = self.live[t]
                for u in range(self.deg[slot]):
                    if self.node_id[self.adj[slot, u]] > self.node_id[slot]:
                        edges_list.append(
                            (int(self.node_id[slot]), int(self.node_id[self.adj[slot, u]]))
                        )
            edges_list.sort()
        edges_arr = np.asarray(edges_list, dtype=np.int64).reshape(-1, 2)
        return {
            "ids": ids_arr,
            "genomes": genomes_arr,
            "objectives": obj_arr,
            "birth": birth_arr,
            "edges": edges_arr,
            "next_id": int(self.next_id),
            "isolated_retries": int(self.isolated_retries),
        }


def run_core(int variant, int mode, int m, int n, int k, long long generations,
             double mutation_rate, double p_add, double p_remove, object seed,
             int64_t[::1] record_gens, uint8_t[::1] net_flags,
             int64_t[::1] snapshot_gens, bint trace, double top_frac):
    """Full run; returns record arrays plus the final population state."""
    cdef _Sim sim = _Sim(variant, mode, m, n, k, mutation_rate, p_add, p_remove,
                         <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF), top_frac)
    sim.init_population()
    cdef int rows = record_gens.shape[0]
    sim.setup_records(rows)
    if trace:
        sim.setup_trace(generations * m)

    histograms = {}
    cdef int row_idx = 0, snap_idx = 0
    cdef int n_snaps = snapshot_gens.shape[0]
    if row_idx < rows and record_gens[row_idx] == 0:
        sim.measure_at(row_idx, net_flags[row_idx])
        row_idx += 1
    if snap_idx < n_snaps and snapshot_gens[snap_idx] == 0:
        histograms[0] = sim.degree_histogram_dict()
        snap_idx += 1

    cdef int64_t g
    for g in range(1, generations + 1):
        sim.step_generation()
        if row_idx < rows and record_gens[row_idx] == g:
            sim.measure_at(row_idx, net_flags[row_idx])
            row_idx += 1
        if snap_idx < n_snaps and snapshot_gens[snap_idx] == g:
            histograms[int(g)] = sim.degree_histogram_dict()
            snap_idx += 1

    out = sim.export_state()
    out["wiring"] = sim.wiring_arr
    out["tables"] = sim.tables_arr
    out["best_objective"] = sim.rec_best_arr
    out["mean_objective"] = sim.rec_mean_arr
    out["diversity_full"] = sim.rec_divf_arr
    out["diversity_top20"] = sim.rec_divt_arr
    out["char_path_length"] = sim.rec_len_arr
    out["degree_average"] = sim.rec_kave_arr
    out["component_count"] = sim.rec_comp_arr
    out["degree_histograms"] = histograms
    if trace:
        out["trace_birth_parent"] = sim.trace_parent_arr
        out["trace_birth_child"] = sim.trace_child_arr
        out["trace_death"] = sim.trace_death_arr
    return out

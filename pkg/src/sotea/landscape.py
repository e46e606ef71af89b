"""NK fitness landscapes with random (non-adjacent) epistatic wiring.

An instance is a frozen problem definition: for each of the ``n`` bits,
``k`` distinct partner indices plus a lookup table of ``2**(k + 1)``
uniform values. The objective of a genome is the mean of the per-bit
table entries. Instances are immutable after construction and safe to
share across threads or processes.
"""

from __future__ import annotations

import json

import numpy as np

from .rng import Xoshiro256

FORMAT_TAG = "sotea.landscape.v1"

# refuse instances whose tables would not fit in memory (total entries)
TABLE_ENTRY_LIMIT = 1 << 30


def check_table_budget(n: int, k: int) -> None:
    total_entries = n * (1 << (k + 1))
    if total_entries > TABLE_ENTRY_LIMIT:
        raise ValueError(
            f"landscape needs {n} tables of {1 << (k + 1)} entries "
            f"({total_entries} total), above the limit of {TABLE_ENTRY_LIMIT}"
        )


class NkLandscape:
    """Frozen landscape: per-bit partner wiring plus lookup tables.

    Table indexing convention: the pattern for bit ``i`` packs
    ``(x_i, partner_1, ..., partner_k)`` with ``x_i`` as the most
    significant bit and partners following in wiring order. Tests that
    need literal table values construct instances directly with this
    convention.
    """

    __slots__ = ("n", "k", "wiring", "tables", "seed")

    def __init__(self, n, k, wiring, tables, seed=None):
        if n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= k <= n - 1:
            raise ValueError(f"k must be in [0, {n - 1}], got {k}")
        wiring = np.asarray(wiring, dtype=np.int64).reshape(n, k)
        tables = np.asarray(tables, dtype=np.float64).reshape(n, 1 << (k + 1))
        for i in range(n):
            row = wiring[i]
            if len(set(row.tolist())) != k or (row == i).any():
                raise ValueError(f"wiring of bit {i} must be {k} distinct partners != {i}")
            if row.size and (row.min() < 0 or row.max() >= n):
                raise ValueError(f"wiring of bit {i} out of range")
        if tables.min() < 0.0 or tables.max() > 1.0:
            raise ValueError("table entries must lie in [0, 1]")
        wiring.setflags(write=False)
        tables.setflags(write=False)
        self.n = n
        self.k = k
        self.wiring = wiring
        self.tables = tables
        self.seed = seed

    @classmethod
    def generate(cls, n: int, k: int, seed: int) -> "NkLandscape":
        """Generate a seeded instance.

        One stream drives everything, traversing bits in ascending
        order; for each bit the partner indices are drawn first (by
        rejection until ``k`` distinct non-self indices accumulate),
        then the ``2**(k + 1)`` table entries. Identical (n, k, seed)
        inputs give bit-identical instances.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= k <= n - 1:
            raise ValueError(f"k must be in [0, {n - 1}], got {k}")
        check_table_budget(n, k)
        try:
            from . import _kernel
        except ImportError:
            _kernel = None
        if _kernel is not None:
            wiring, tables = _kernel.generate_landscape_arrays(n, k, seed)
        else:
            wiring, tables = _generate_arrays(n, k, seed)
        return cls(n, k, wiring, tables, seed=seed)

    def table_index(self, i: int, genome: np.ndarray) -> int:
        """Pack bit ``i`` and its partners into a table index."""
        idx = int(genome[i]) << self.k
        row = self.wiring[i]
        for j in range(self.k):
            idx |= int(genome[row[j]]) << (self.k - 1 - j)
        return idx

    def fitness_contribution(self, i: int, genome: np.ndarray) -> float:
        """Table entry of bit ``i`` under ``genome``."""
        if not 0 <= i < self.n:
            raise IndexError(f"bit index {i} out of range for n={self.n}")
        if len(genome) != self.n:
            raise ValueError(f"genome length {len(genome)} != n={self.n}")
        return float(self.tables[i, self.table_index(i, genome)])

    def evaluate(self, genome: np.ndarray) -> float:
        """Mean of the per-bit contributions; always in [0, 1].

        Accumulates in ascending bit order so the compiled kernel
        produces the identical double.
        """
        if len(genome) != self.n:
            raise ValueError(f"genome length {len(genome)} != n={self.n}")
        tables = self.tables
        acc = 0.0
        for i in range(self.n):
            acc += tables[i, self.table_index(i, genome)]
        return acc / self.n

    def save(self, path) -> None:
        """Write the instance as versioned JSON (exact float round-trip)."""
        payload = {
            "format": FORMAT_TAG,
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "wiring": self.wiring.tolist(),
            "tables": self.tables.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path) -> "NkLandscape":
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("format") != FORMAT_TAG:
            raise ValueError(f"unrecognized landscape file format: {payload.get('format')!r}")
        return cls(
            payload["n"],
            payload["k"],
            payload["wiring"],
            payload["tables"],
            seed=payload["seed"],
        )

    def __repr__(self):
        return f"NkLandscape(n={self.n}, k={self.k}, seed={self.seed})"


def _generate_arrays(n, k, seed):
    """Pure-Python landscape construction; mirrored by the kernel."""
    rng = Xoshiro256(seed)
    wiring = np.empty((n, k), dtype=np.int64)
    tables = np.empty((n, 1 << (k + 1)), dtype=np.float64)
    for i in range(n):
        chosen = []
        while len(chosen) < k:
            c = rng.bounded(n)
            if c == i or c in chosen:
                continue
            chosen.append(c)
        wiring[i] = chosen
        row = tables[i]
        for e in range(row.shape[0]):
            row[e] = rng.random()
    return wiring, tables

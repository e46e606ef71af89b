"""Experiment orchestration: sweeps, replications, file emission, manifest.

A spec file (JSON always; TOML when the interpreter provides tomllib or
tomli) describes a base configuration plus optional sweep axes over
variant, fitness_mode, k_nk, and m. Every sweep point runs `replications`
times; replication r uses the seed derived from the master seed with
stream index r, so reruns are byte-identical and sweep points share
landscapes and initial populations at equal replication index.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import analysis, engine, snapshots
from .network import fit_exponential, fit_linear, fit_log_linear, network_stats
from .rng import derive_seed

DEFAULT_M_SWEEP = [50, 100, 200, 400]
NETSTATS_CSV_VERSION = "sotea.netstats.v1"
FITS_CSV_VERSION = "sotea.fits.v1"


class SpecError(ValueError):
    """Invalid experiment spec (CLI exit code 2)."""


class BudgetError(RuntimeError):
    """Sweep size exceeds the configured run budget (CLI exit code 4)."""


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class ExperimentSpec:
    variants: list[str]
    fitness_modes: list[str]
    m_values: list[int]
    k_values: list[int]
    n: int
    generations: int
    replications: int = 10
    seed: int = 0
    mutation_rate: float | None = None
    p_add: float = 0.10
    p_remove: float = 0.10
    metric_stride: int = 1
    network_stride: int = 20
    snapshot_generations: list[int] = field(default_factory=list)
    budget: int = 256
    workers: int = 1
    out_dir: str | None = None
    m_explicit: bool = True

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        known = {
            "variant", "fitness_mode", "m", "k_nk", "n", "generations",
            "replications", "seed", "mutation_rate", "p_add", "p_remove",
            "metric_stride", "network_stride", "snapshot_generations",
            "budget", "workers", "out_dir",
        }
        unknown = set(raw) - known
        if unknown:
            raise SpecError(f"unknown spec keys: {sorted(unknown)}")
        try:
            spec = cls(
                variants=[str(v) for v in _as_list(raw.get("variant", "sotea"))],
                fitness_modes=[str(v) for v in _as_list(raw.get("fitness_mode", "epistatic"))],
                m_values=[int(v) for v in _as_list(raw.get("m", 100))],
                k_values=[int(v) for v in _as_list(raw.get("k_nk", 14))],
                n=int(raw.get("n", 30)),
                generations=int(raw["generations"]),
                replications=int(raw.get("replications", 10)),
                seed=int(raw.get("seed", 0)),
                mutation_rate=raw.get("mutation_rate"),
                p_add=float(raw.get("p_add", 0.10)),
                p_remove=float(raw.get("p_remove", 0.10)),
                metric_stride=int(raw.get("metric_stride", 1)),
                network_stride=int(raw.get("network_stride", 20)),
                snapshot_generations=[int(g) for g in raw.get("snapshot_generations", [])],
                budget=int(raw.get("budget", 256)),
                workers=int(raw.get("workers", 1)),
                out_dir=raw.get("out_dir"),
                m_explicit="m" in raw,
            )
        except KeyError as exc:
            raise SpecError(f"missing required spec key: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise SpecError(f"malformed spec value: {exc}") from exc
        spec.validate()
        return spec

    def validate(self) -> None:
        for v in self.variants:
            if v not in engine.VARIANTS:
                raise SpecError(f"unknown variant {v!r}")
        for v in self.fitness_modes:
            if v not in engine.FITNESS_MODES:
                raise SpecError(f"unknown fitness_mode {v!r}")
        if self.replications < 1:
            raise SpecError("replications must be >= 1")
        if self.generations < 0:
            raise SpecError("generations must be >= 0")
        if self.workers < 1:
            raise SpecError("workers must be >= 1")
        # EaConfig validation catches the rest, once per sweep point
        for point in self.sweep_points():
            try:
                engine.EaConfig(
                    variant=point["variant"], fitness_mode=point["fitness_mode"],
                    m=point["m"], generations=self.generations, n=self.n,
                    k_nk=point["k_nk"], mutation_rate=self.mutation_rate,
                    p_add=self.p_add, p_remove=self.p_remove, seed=0,
                )
            except ValueError as exc:
                raise SpecError(str(exc)) from exc

    def resolved(self) -> dict:
        """Every parameter, fully explicit, for the manifest."""
        return {
            "variant": self.variants,
            "fitness_mode": self.fitness_modes,
            "m": self.m_values,
            "k_nk": self.k_values,
            "n": self.n,
            "generations": self.generations,
            "replications": self.replications,
            "seed": self.seed,
            "mutation_rate": self.mutation_rate,
            "p_add": self.p_add,
            "p_remove": self.p_remove,
            "metric_stride": self.metric_stride,
            "network_stride": self.network_stride,
            "snapshot_generations": self.snapshot_generations,
            "budget": self.budget,
            "workers": self.workers,
        }

    def sweep_points(self):
        for variant in self.variants:
            for mode in self.fitness_modes:
                for m in self.m_values:
                    for k in self.k_values:
                        yield {"variant": variant, "fitness_mode": mode, "m": m, "k_nk": k}

    def run_configs(self):
        """(point, replication, EaConfig) triples in deterministic order."""
        for point in self.sweep_points():
            for rep in range(self.replications):
                cfg = engine.EaConfig(
                    variant=point["variant"],
                    fitness_mode=point["fitness_mode"],
                    m=point["m"],
                    generations=self.generations,
                    n=self.n,
                    k_nk=point["k_nk"],
                    mutation_rate=self.mutation_rate,
                    p_add=self.p_add,
                    p_remove=self.p_remove,
                    seed=derive_seed(self.seed, rep),
                )
                yield point, rep, cfg

    def run_count(self) -> int:
        return sum(1 for _ in self.sweep_points()) * self.replications

    def check_budget(self) -> None:
        count = self.run_count()
        if count > self.budget:
            raise BudgetError(f"sweep needs {count} runs, budget is {self.budget}")


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:
            try:
                import tomli as tomllib
            except ImportError:
                raise SpecError(
                    "TOML spec files need Python 3.11+ (tomllib) or the tomli package; "
                    "use JSON instead"
                ) from None
        try:
            raw = tomllib.loads(data.decode())
        except Exception as exc:
            raise SpecError(f"invalid TOML in {path}: {exc}") from exc
    else:
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecError("spec file must contain a mapping")
    return ExperimentSpec.from_dict(raw)


def preset_path(name: str):
    from importlib.resources import files

    path = files("sotea").joinpath("presets", f"{name}.json")
    return path if path.is_file() else None


def resolve_spec_argument(arg: str) -> ExperimentSpec:
    """CLI spec argument: a file path, or a bundled preset name."""
    if not os.path.exists(arg):
        preset = preset_path(arg)
        if preset is not None:
            return ExperimentSpec.from_dict(json.loads(preset.read_text()))
        raise SpecError(f"spec file not found: {arg}")
    return load_spec(arg)


def _point_tag(point: dict) -> str:
    return f"{point['variant']}_{point['fitness_mode']}_m{point['m']}_k{point['k_nk']}"


def _execute_run(args):
    """Worker entry point; must stay top-level for pickling."""
    point, rep, cfg, spec_opts, run_dir = args
    result = engine.run(
        cfg,
        metric_stride=spec_opts["metric_stride"],
        network_stride=spec_opts["network_stride"],
        snapshot_generations=spec_opts["snapshot_generations"],
    )
    csv_name = f"run_{_point_tag(point)}_rep{rep}.csv"
    analysis.write_run_csv(result.record, Path(run_dir) / csv_name)
    hist_files = []
    for gen, hist in sorted(result.record.degree_histograms.items()):
        hist_name = f"degrees_{_point_tag(point)}_rep{rep}_gen{gen}.csv"
        analysis.write_degree_histogram_csv(hist, Path(run_dir) / hist_name)
        hist_files.append(hist_name)
    return {
        "point": point,
        "rep": rep,
        "seed": cfg.seed,
        "csv": csv_name,
        "histograms": hist_files,
        "record": result.record,
        "engine": result.engine,
        "meta": result.meta,
    }


def run_experiment(spec: ExperimentSpec, out_dir) -> dict:
    """All sweep runs + aggregates + manifest; returns the manifest dict."""
    spec.check_budget()
    out = Path(out_dir)
    runs_dir = out / "runs"
    agg_dir = out / "aggregate"
    runs_dir.mkdir(parents=True, exist_ok=True)
    agg_dir.mkdir(parents=True, exist_ok=True)

    opts = {
        "metric_stride": spec.metric_stride,
        "network_stride": spec.network_stride,
        "snapshot_generations": spec.snapshot_generations,
    }
    jobs = [(point, rep, cfg, opts, str(runs_dir)) for point, rep, cfg in spec.run_configs()]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(_execute_run, jobs, chunksize=1))
    else:
        outcomes = [_execute_run(job) for job in jobs]

    manifest_runs = []
    by_point: dict[str, list] = {}
    for outcome in outcomes:
        tag = _point_tag(outcome["point"])
        by_point.setdefault(tag, []).append(outcome)
        manifest_runs.append(
            {
                "point": outcome["point"],
                "replication": outcome["rep"],
                "seed": outcome["seed"],
                "csv": f"runs/{outcome['csv']}",
                "histograms": [f"runs/{h}" for h in outcome["histograms"]],
                "engine": outcome["engine"],
                "isolated_retries": outcome["meta"]["isolated_retries"],
            }
        )

    aggregates = []
    for tag, group in by_point.items():
        agg = analysis.aggregate([o["record"] for o in group])
        agg_name = f"agg_{tag}.csv"
        analysis.write_aggregate_csv(agg, agg_dir / agg_name)
        aggregates.append({"point": group[0]["point"], "csv": f"aggregate/{agg_name}", "runs": len(group)})

    manifest = {
        "artifact": {"name": "sotea", "version": _version()},
        "command": "run",
        "spec": spec.resolved(),
        "runs": manifest_runs,
        "aggregates": aggregates,
    }
    _write_manifest(manifest, out / "manifest.json")
    return manifest


def netstats_experiment(spec: ExperimentSpec, out_dir) -> dict:
    """Topology statistics versus population size, Table-1 style.

    Runs every (m, replication) pair to the final generation, measures
    the final graph, pools degree histograms, and fits the scaling laws.
    The panmictic variant is computed analytically without simulation.
    """
    if len(spec.variants) != 1 or len(spec.fitness_modes) != 1 or len(spec.k_values) != 1:
        raise SpecError("netstats expects exactly one variant, fitness_mode, and k_nk")
    variant = spec.variants[0]
    if not spec.m_explicit:
        spec.m_values = list(DEFAULT_M_SWEEP)
    spec.check_budget()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    pooled_hist: dict[int, int] = {}
    per_m_hist: dict[int, dict[int, int]] = {}
    if variant == "panmictic":
        for m in spec.m_values:
            rows.append({"m": m, "L_mean": 1.0, "L_std": 0.0, "k_ave_mean": float(m - 1),
                         "k_ave_std": 0.0, "components_mean": 1.0, "runs": 0})
            pooled_hist[m - 1] = pooled_hist.get(m - 1, 0) + m
            per_m_hist[m] = {m - 1: m}
    else:
        for m in spec.m_values:
            l_vals, k_vals, c_vals = [], [], []
            per_m_hist[m] = {}
            for rep in range(spec.replications):
                cfg = engine.EaConfig(
                    variant=variant, fitness_mode=spec.fitness_modes[0], m=m,
                    generations=spec.generations, n=spec.n, k_nk=spec.k_values[0],
                    mutation_rate=spec.mutation_rate, p_add=spec.p_add,
                    p_remove=spec.p_remove, seed=derive_seed(spec.seed, rep),
                )
                result = engine.run(cfg, metric_stride=max(spec.generations, 1), network_stride=max(spec.generations, 1))
                stats = network_stats(result.final_state.graph)
                l_vals.append(stats.char_path_length)
                k_vals.append(stats.degree_average)
                c_vals.append(stats.component_count)
                for d, c in stats.degree_histogram.items():
                    pooled_hist[d] = pooled_hist.get(d, 0) + c
                    per_m_hist[m][d] = per_m_hist[m].get(d, 0) + c
            rows.append({
                "m": m,
                "L_mean": _mean(l_vals), "L_std": _std(l_vals),
                "k_ave_mean": _mean(k_vals), "k_ave_std": _std(k_vals),
                "components_mean": _mean(c_vals), "runs": len(l_vals),
            })

    import csv as _csv

    with open(out / "netstats.csv", "w", newline="") as fh:
        fh.write(f"# {NETSTATS_CSV_VERSION} variant={variant}\n")
        writer = _csv.writer(fh)
        writer.writerow(["m", "L_mean", "L_std", "k_ave_mean", "k_ave_std", "components_mean", "runs"])
        for row in rows:
            writer.writerow([row["m"], repr(row["L_mean"]), repr(row["L_std"]),
                             repr(row["k_ave_mean"]), repr(row["k_ave_std"]),
                             repr(row["components_mean"]), row["runs"]])

    fits = []
    if len(rows) >= 3:
        if variant == "cellular":
            fit_l = fit_linear([(r["m"], r["L_mean"]) for r in rows])
            fits.append(("L_vs_m_linear", fit_l.slope, fit_l.intercept, fit_l.r_squared))
        else:
            fit_l = fit_log_linear([(r["m"], r["L_mean"]) for r in rows])
            fits.append(("L_vs_log_m", fit_l.slope, fit_l.intercept, fit_l.r_squared))
        fit_k = fit_log_linear([(r["m"], r["k_ave_mean"]) for r in rows])
        fits.append(("k_ave_vs_log_m", fit_k.slope, fit_k.intercept, fit_k.r_squared))
    try:
        fit_h = fit_exponential(pooled_hist)
        fits.append(("degree_histogram_exponential", -fit_h.rate, math.nan, fit_h.r_squared))
    except ValueError:
        pass

    with open(out / "netstats_fits.csv", "w", newline="") as fh:
        fh.write(f"# {FITS_CSV_VERSION}\n")
        writer = _csv.writer(fh)
        writer.writerow(["fit", "slope_or_neg_rate", "intercept", "r_squared"])
        for name, slope, intercept, r2 in fits:
            writer.writerow([name, repr(float(slope)), analysis._fmt(intercept), repr(float(r2))])

    analysis.write_degree_histogram_csv(pooled_hist, out / "degree_histogram_pooled.csv")
    for m, hist in per_m_hist.items():
        analysis.write_degree_histogram_csv(hist, out / f"degree_histogram_m{m}.csv")

    manifest = {
        "artifact": {"name": "sotea", "version": _version()},
        "command": "netstats",
        "spec": spec.resolved(),
        "measure_generation": spec.generations,
        "rows": rows,
        "fits": [{"fit": f[0], "slope_or_neg_rate": f[1],
                  "intercept": None if isinstance(f[2], float) and math.isnan(f[2]) else f[2],
                  "r_squared": f[3]} for f in fits],
        "files": ["netstats.csv", "netstats_fits.csv", "degree_histogram_pooled.csv"]
        + [f"degree_histogram_m{m}.csv" for m in per_m_hist],
    }
    _write_manifest(manifest, out / "manifest.json")
    return manifest


def snapshot_experiment(spec: ExperimentSpec, generation: int, out_dir) -> dict:
    """One replication to the requested generation, full graph export.

    Pressure edges are written for both fitness modes evaluated on the
    same frozen graph.
    """
    if len(spec.variants) != 1 or spec.variants[0] == "panmictic":
        raise SpecError("snapshot expects exactly one structured variant")
    if generation < 0:
        raise SpecError("generation must be >= 0")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = engine.EaConfig(
        variant=spec.variants[0], fitness_mode=spec.fitness_modes[0], m=spec.m_values[0],
        generations=generation, n=spec.n, k_nk=spec.k_values[0],
        mutation_rate=spec.mutation_rate, p_add=spec.p_add, p_remove=spec.p_remove,
        seed=derive_seed(spec.seed, 0),
    )
    result = engine.run(cfg, metric_stride=max(generation, 1), network_stride=max(generation, 1))
    state = result.final_state
    snapshots.write_dot(state.graph, out / f"snapshot_gen{generation}.dot")
    snapshots.write_edge_list_csv(state.graph, out / f"edges_gen{generation}.csv")
    snapshots.write_node_attributes_csv(state, out / f"nodes_gen{generation}.csv")
    snapshots.write_pressure_edges_csv(state, "epistatic", out / f"pressure_epistatic_gen{generation}.csv")
    snapshots.write_pressure_edges_csv(state, "raw", out / f"pressure_raw_gen{generation}.csv")
    manifest = {
        "artifact": {"name": "sotea", "version": _version()},
        "command": "snapshot",
        "spec": spec.resolved(),
        "generation": generation,
        "seed": cfg.seed,
        "engine": result.engine,
        "files": [
            f"snapshot_gen{generation}.dot",
            f"edges_gen{generation}.csv",
            f"nodes_gen{generation}.csv",
            f"pressure_epistatic_gen{generation}.csv",
            f"pressure_raw_gen{generation}.csv",
        ],
    }
    _write_manifest(manifest, out / "manifest.json")
    return manifest


def _mean(values):
    return sum(values) / len(values)


def _std(values):
    if len(values) < 2:
        return 0.0
    mu = _mean(values)
    return math.sqrt(sum((v - mu) ** 2 for v in values) / (len(values) - 1))


def _version() -> str:
    from . import __version__

    return __version__


def _write_manifest(manifest: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

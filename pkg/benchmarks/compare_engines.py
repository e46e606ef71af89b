"""Benchmark the compiled kernel against the pure-Python engine.

Both engines produce byte-identical output; this script measures the
speed gap on a short run and extrapolates generations/second.

    python benchmarks/compare_engines.py [--m 100] [--n 30] [--k 14]
"""

import argparse
import time

from sotea.engine import EaConfig, compiled_available, run


def time_engine(engine_name, cfg, generations):
    cfg = EaConfig(**{**cfg.__dict__, "generations": generations})
    start = time.perf_counter()
    result = run(cfg, engine=engine_name, metric_stride=max(generations, 1))
    elapsed = time.perf_counter() - start
    return elapsed, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=100)
    parser.add_argument("--n", type=int, default=30)
    parser.add_argument("--k", type=int, default=14)
    parser.add_argument("--variant", default="sotea")
    parser.add_argument("--python-generations", type=int, default=60)
    parser.add_argument("--compiled-generations", type=int, default=2000)
    args = parser.parse_args()

    base = EaConfig(variant=args.variant, fitness_mode="epistatic", m=args.m,
                    generations=1, n=args.n, k_nk=args.k, seed=12345)

    py_time, py_result = time_engine("python", base, args.python_generations)
    py_rate = args.python_generations / py_time
    print(f"python   : {args.python_generations:6d} generations in {py_time:7.2f}s "
          f"({py_rate:8.1f} gen/s)")

    if not compiled_available():
        print("compiled : kernel not built (pip install -e . or python setup.py build_ext --inplace)")
        return

    c_time, c_result = time_engine("compiled", base, args.compiled_generations)
    c_rate = args.compiled_generations / c_time
    print(f"compiled : {args.compiled_generations:6d} generations in {c_time:7.2f}s "
          f"({c_rate:8.1f} gen/s)")
    print(f"speedup  : {c_rate / py_rate:.0f}x")

    # same-config outputs must agree exactly
    check = EaConfig(**{**base.__dict__, "generations": args.python_generations})
    a = run(check, engine="python", metric_stride=1)
    b = run(check, engine="compiled", metric_stride=1)
    import numpy as np

    assert np.array_equal(a.record.diversity_full, b.record.diversity_full, equal_nan=True)
    print("outputs  : identical across engines")


if __name__ == "__main__":
    main()

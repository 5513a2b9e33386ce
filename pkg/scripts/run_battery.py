"""Reproduce the CRV table, the test-split error study and the equivalence check for every class.

    python3 scripts/run_battery.py --seed 7 --m 2000
"""
import argparse
import time

import numpy as np

from geopca import CLASSES, FIRST_SET, MassWeightConfig, analyze, build_dataset, crv_table, verify_equivalence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--configs", type=int, default=20)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()

    results = {}
    for name, spec in CLASSES.items():
        t0 = time.perf_counter()
        results[name] = analyze(build_dataset(spec, args.m, args.seed), split_seed=args.seed)
        print(f"{name:<17} fitted in {time.perf_counter() - t0:5.2f}s  rank={results[name].model.rank}")

    print()
    print(crv_table({n: r.model for n, r in results.items()}).to_text())

    print("\nmean |p_est - p_true| on the test split")
    for name, res in results.items():
        for s in res.errors:
            print(f"  {name:<17} {s.label:>4} (r={s.r:>3})  mean={s.overall_mean:.3e}  max={s.max_abs.max():.3e}")

    print(f"\nequivalence of the standard and joint routes, {args.configs} random M/W configs, tol {args.tol:g}")
    rng = np.random.default_rng(args.seed)
    for name, res in results.items():
        X, P = res.dataset.subset(res.split.train)
        reports = [verify_equivalence(X, P, MassWeightConfig.random(res.dataset.spec.n_points, rng),
                                      tol=args.tol, seed=int(rng.integers(2**31)), model=res.model)
                   for _ in range(args.configs)]
        passed = sum(r.passed for r in reports)
        op = max(r.operator_deviation for r in reports)
        probe = max(r.probe_deviation for r in reports)
        tag = "" if name in FIRST_SET else "  (informational)"
        print(f"  {name:<17} passed {passed}/{len(reports)}  operator<= {op:.2e}  probe<= {probe:.2e}{tag}")


if __name__ == "__main__":
    main()

"""Test-split estimation error as a function of the number of retained components r.

    python3 scripts/r_sweep.py --class helix --seed 7
"""
import argparse

from geopca import build_dataset, fit_parameter_map, fit_pca, get_class, split
from geopca.estimation import estimation_error


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--class", dest="name", default="helix")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--max-r", type=int, default=40)
    args = ap.parse_args()

    ds = build_dataset(get_class(args.name), args.m, args.seed)
    sp = split(ds, 0.9, args.seed)
    X_train, P_train = ds.subset(sp.train)
    X_test, P_test = ds.subset(sp.test)
    model = fit_pca(X_train)
    print(f"{args.name}: rank {model.rank}, k {ds.spec.k}")
    print("    r  active   mean|err|    max|err|")
    for r in range(1, min(args.max_r, model.n_components) + 1):
        pmap = fit_parameter_map(model, X_train, P_train, r)
        s = estimation_error(pmap, model, X_test, P_test)
        print(f"{r:5d} {pmap.active:7d}  {s.overall_mean:10.3e}  {s.max_abs.max():10.3e}")


if __name__ == "__main__":
    main()

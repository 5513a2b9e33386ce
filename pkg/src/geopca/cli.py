"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 data error.
``GEOPCA_OUT_DIR`` sets the default output directory of fit, report and pipeline.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as dsio
from .errors import FormatError, RankError, ShapeError, UndefinedMeasureError
from .estimation import (MassWeightConfig, ParameterMap, estimate, fit_parameter_map,
                         verify_equivalence)
from .geometry import CLASSES, get_class
from .pca import PcaModel, fit_pca, min_components, vec
from .report import (PRESET_LABELS, THRESHOLDS, ClassAnalysis, CrvTable, error_report,
                     r_presets, read_geometry, write_class_report)

log = logging.getLogger("geopca")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _default_out(sub: str) -> str:
    return str(Path(os.environ.get("GEOPCA_OUT_DIR", "geopca_out")) / sub)


def _spec_for(name: str, n_points: int | None):
    if name not in CLASSES:
        raise UsageError(f"unknown class {name!r}; available: {', '.join(CLASSES)}")
    spec = get_class(name)
    return spec.with_points(n_points) if n_points else spec


def _write_json(path: Path, doc: dict) -> None:
    dsio.write_atomic(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8"))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def do_gen(class_name: str, m: int, seed: int, out: str | Path, n_points: int | None = None,
           params_csv: str | None = None) -> dsio.Dataset:
    spec = _spec_for(class_name, n_points)
    ds = dsio.build_dataset(spec, m, seed)
    dsio.save(ds, out)
    if params_csv:
        dsio.export_params_csv(ds, params_csv)
    print(f"class={spec.name} k={spec.k} n={spec.n_points} m={ds.m} seed={ds.seed} -> {out}")
    return ds


def _provenance(ds: dsio.Dataset, m: int) -> dict:
    return {"class_name": ds.spec.name, "k": ds.spec.k, "n": ds.spec.n_points, "m": m, "seed": ds.seed}


def _fit_split(ds: dsio.Dataset, fraction: float | None, seed: int) -> dsio.Split:
    """Train/test split; datasets too small to hold out samples are used whole (fraction None)."""
    if fraction is not None:
        sp = dsio.split(ds, fraction, seed) if ds.m >= 3 else None
        if sp is not None and len(sp.train) >= 2:
            return sp
        log.warning("%s: %d samples are too few to split; fitting and evaluating on all of them",
                    ds.spec.name, ds.m)
    everything = np.arange(ds.m)
    return dsio.Split(train=everything, test=everything)


def _crv_values(model: PcaModel) -> list[int] | None:
    if model.rank == 0:
        return None
    return [min_components(model, t) for t in THRESHOLDS]


def do_fit(dataset_path: str | Path, out: str | Path, split_seed: int = 0,
           train_fraction: float = 0.9, labels=PRESET_LABELS, custom_r: list[int] | None = None) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ds = dsio.load(dataset_path, dsio.Dataset)
    sp = _fit_split(ds, train_fraction, split_seed)
    if len(sp.train) == ds.m:
        train_fraction = None
    X, P = ds.subset(sp.train)
    model = fit_pca(X)
    if model.rank <= 1:
        log.warning("%s: numerical rank %d from %d training samples", ds.spec.name, model.rank, model.m)
    t = _crv_values(model)
    if t is None:
        labels = [lab for lab in labels if lab != "t95"]
    presets = r_presets(ds.spec.k, t[1] if t else ds.spec.k, model.n_components, labels)
    maps = {p.label: fit_parameter_map(model, X, P, p.r) for p in presets}
    for r in custom_r or []:
        try:
            maps[f"r{r}"] = fit_parameter_map(model, X, P, r, strict=True)
        except (RankError, ValueError) as exc:
            raise RankError(f"preset r{r}: {exc}") from None

    prov = _provenance(ds, model.m)
    dsio.save(model, out / "model.egpc", prov)
    for label, pm in maps.items():
        dsio.save(pm, out / f"map_{label}.egpc", prov)
    manifest = {
        "dataset": os.path.relpath(Path(dataset_path).resolve(), out.resolve()),
        "class": ds.spec.name,
        "split_seed": split_seed,
        "train_fraction": train_fraction,
        "rank": model.rank,
        "crv_thresholds": list(THRESHOLDS),
        "crv_t": t,
        "maps": {label: {"r": pm.r, "active": pm.active} for label, pm in maps.items()},
    }
    _write_json(out / "fit.json", manifest)
    shown = " ".join(f"t({th:g})={v}" for th, v in zip(THRESHOLDS, t)) if t else "t undefined (zero variance)"
    print(f"{ds.spec.name}: rank={model.rank} {shown} k={ds.spec.k}")
    return manifest


def do_estimate(model_path: str, map_path: str, cloud_path: str) -> np.ndarray:
    model = dsio.load(model_path, PcaModel)
    pmap, header = dsio.load_with_header(map_path)
    if not isinstance(pmap, ParameterMap):
        raise FormatError(f"{map_path} does not hold a parameter map")
    cloud = read_geometry(cloud_path)
    x = vec(cloud)
    if x.shape[0] != model.l:
        raise ShapeError(f"cloud has {cloud.shape[0]} points, model expects {model.l // 3}")
    p = estimate(pmap, model, x)
    names = CLASSES[header["class_name"]].param_names if header["class_name"] in CLASSES else \
        [f"p{i + 1}" for i in range(p.shape[0])]
    for name, value in zip(names, p):
        print(f"{name} = {float(value)!r}")
    return p


def do_verify(dataset_path: str, seed: int = 0, tol: float = 1e-10, configs: int = 20,
              trials: int = 100, identity: bool = False, split_seed: int = 0,
              train_fraction: float = 0.9) -> bool:
    ds = dsio.load(dataset_path, dsio.Dataset)
    sp = dsio.split(ds, train_fraction, split_seed)
    X, P = ds.subset(sp.train)
    model = fit_pca(X)
    rng = np.random.default_rng(seed)
    ok = True
    for i in range(configs):
        cfg = (MassWeightConfig.identity(ds.spec.n_points) if identity
               else MassWeightConfig.random(ds.spec.n_points, rng))
        rep = verify_equivalence(X, P, cfg, trials=trials, tol=tol, seed=seed + i, model=model)
        print(f"{ds.spec.name} config {i + 1}/{configs}: {rep.summary()}")
        ok &= rep.passed
    print("equivalence " + ("verified" if ok else "NOT verified"))
    return ok


def do_report(fit_dir: str | Path, out: str | Path) -> ClassAnalysis:
    fit_dir = Path(fit_dir)
    manifest = json.loads((fit_dir / "fit.json").read_text())
    # dataset path is stored relative to the fit directory
    ds = dsio.load(fit_dir / manifest["dataset"], dsio.Dataset)
    model = dsio.load(fit_dir / "model.egpc", PcaModel)
    maps = {label: dsio.load(fit_dir / f"map_{label}.egpc", ParameterMap) for label in manifest["maps"]}
    sp = _fit_split(ds, manifest["train_fraction"], manifest["split_seed"])
    X_test, P_test = ds.subset(sp.test)
    errors = error_report(maps, model, X_test, P_test)
    result = ClassAnalysis(ds, sp, model, [], maps, errors)
    write_class_report(result, out)
    table = _table([result])
    dsio.write_atomic(Path(out) / "crv_table.csv", table.to_csv().encode("utf-8"))
    print(table.to_text())
    return result


def _table(results) -> CrvTable:
    return CrvTable(THRESHOLDS, tuple(r.crv_row() for r in results if r.model.rank))


def do_pipeline(out: str | Path, seed: int = 0, m: int = 2000, classes=None,
                n_points: int | None = None, split_seed: int = 0) -> CrvTable:
    out = Path(out)
    results = []
    for name in classes or list(CLASSES):
        cdir = out / name
        do_gen(name, m, seed, cdir / "dataset.egpc", n_points, cdir / "params.csv")
        do_fit(cdir / "dataset.egpc", cdir / "fit", split_seed=split_seed)
        results.append(do_report(cdir / "fit", cdir / "report"))
    table = _table(results)
    dsio.write_atomic(out / "crv_table.csv", table.to_csv().encode("utf-8"))
    dsio.write_atomic(out / "crv_table.txt", (table.to_text() + "\n").encode("utf-8"))
    summary = {
        r.name: {s.label: {"r": s.r, "mean_abs_error": [float(v) for v in s.mean_abs]} for s in r.errors}
        for r in results
    }
    _write_json(out / "error_summary.json", summary)
    print(table.to_text())
    return table


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geopca", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a geometry dataset")
    g.add_argument("--class", dest="class_name", required=True)
    g.add_argument("--m", type=int, default=2000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-points", type=int, default=None)
    g.add_argument("--out", required=True)
    g.add_argument("--params-csv", default=None, help="also export the parameters as CSV")

    f = sub.add_parser("fit", help="fit PCA and parameter maps on the training split")
    f.add_argument("--dataset", required=True)
    f.add_argument("--split-seed", type=int, default=0)
    f.add_argument("--train-fraction", type=float, default=0.9)
    f.add_argument("--presets", default=",".join(PRESET_LABELS),
                   help="comma-separated subset of k,t95,200")
    f.add_argument("--r", type=int, action="append", default=[], help="extra explicit r (repeatable)")
    f.add_argument("--out", default=None)

    e = sub.add_parser("estimate", help="estimate parameters of one cloud")
    e.add_argument("--model", required=True)
    e.add_argument("--map", required=True)
    e.add_argument("--cloud", required=True, help="CSV with x,y,z header")

    v = sub.add_parser("verify", help="check that joint and standard estimation coincide")
    v.add_argument("--dataset", required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--configs", type=int, default=20)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--identity", action="store_true", help="use M = W = I")
    v.add_argument("--split-seed", type=int, default=0)
    v.add_argument("--train-fraction", type=float, default=0.9)

    r = sub.add_parser("report", help="write CRV table, spectra, errors and geometry exports")
    r.add_argument("--fit-dir", required=True)
    r.add_argument("--out", default=None)

    p = sub.add_parser("pipeline", help="gen, fit and report for every class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--n-points", type=int, default=None)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--classes", default=None, help="comma-separated class names")
    p.add_argument("--out", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            do_gen(args.class_name, args.m, args.seed, args.out, args.n_points, args.params_csv)
        elif args.command == "fit":
            labels = [s.strip() for s in args.presets.split(",") if s.strip()]
            bad = [s for s in labels if s not in PRESET_LABELS]
            if bad:
                raise UsageError(f"unknown preset(s) {bad}; choose from {', '.join(PRESET_LABELS)}")
            do_fit(args.dataset, args.out or _default_out("fit"), args.split_seed,
                   args.train_fraction, labels, args.r)
        elif args.command == "estimate":
            do_estimate(args.model, args.map, args.cloud)
        elif args.command == "verify":
            if args.tol < 0:
                raise UsageError("--tol must be non-negative")
            ok = do_verify(args.dataset, args.seed, args.tol, args.configs, args.trials,
                           args.identity, args.split_seed, args.train_fraction)
            return EXIT_OK if ok else EXIT_FAIL
        elif args.command == "report":
            do_report(args.fit_dir, args.out or _default_out("report"))
        elif args.command == "pipeline":
            classes = [c.strip() for c in args.classes.split(",")] if args.classes else None
            for c in classes or []:
                _spec_for(c, None)
            do_pipeline(args.out or _default_out("pipeline"), args.seed, args.m, classes,
                        args.n_points, args.split_seed)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, ShapeError, RankError, UndefinedMeasureError, ValueError, KeyError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

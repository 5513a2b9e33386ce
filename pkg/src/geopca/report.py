"""Tables and data exports: CRV table, eigenvalue spectra, estimation errors, geometry CSVs."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import Dataset, Split, format_real, split, write_atomic
from .estimation import ErrorSummary, ParameterMap, estimation_error, fit_parameter_map
from .geometry import get_class
from .pca import PcaModel, fit_pca, min_components, unvec

log = logging.getLogger(__name__)

THRESHOLDS = (0.9, 0.95, 0.99)
PRESET_LABELS = ("k", "t95", "200")


@dataclass(frozen=True)
class CrvRow:
    name: str
    k: int
    t: tuple[int, ...]


@dataclass(frozen=True)
class CrvTable:
    thresholds: tuple[float, ...]
    rows: tuple[CrvRow, ...]

    def row(self, name: str) -> CrvRow:
        return next(r for r in self.rows if r.name == name)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["class", *(f"crv_{t:g}" for t in self.thresholds), "k"])
        for r in self.rows:
            w.writerow([r.name, *r.t, r.k])
        return out.getvalue()

    def to_text(self) -> str:
        head = f"{'class':<18}" + "".join(f"{'CRV=' + format(t, 'g'):>10}" for t in self.thresholds) + f"{'k':>5}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(f"{r.name:<18}" + "".join(f"{v:>10}" for v in r.t) + f"{r.k:>5}")
        return "\n".join(lines)


def crv_table(models: Mapping[str, PcaModel], thresholds: Sequence[float] = THRESHOLDS,
              ks: Mapping[str, int] | None = None) -> CrvTable:
    """``t`` per class and threshold; ``k`` from ``ks`` or the class registry."""
    thresholds = tuple(float(t) for t in thresholds)
    rows = []
    for name, model in models.items():
        k = ks[name] if ks is not None else get_class(name).k
        rows.append(CrvRow(name, k, tuple(min_components(model, t) for t in thresholds)))
    return CrvTable(thresholds, tuple(rows))


# --------------------------------------------------------------------------
# CSV exports
# --------------------------------------------------------------------------

def _csv_bytes(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_real(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return out.getvalue().encode("utf-8")


def spectrum_csv(model: PcaModel) -> bytes:
    """Strictly positive eigenvalues in descending order, flagged by rank cutoff."""
    rows = [(i + 1, float(lam), int(i < model.rank))
            for i, lam in enumerate(model.eigenvalues) if lam > 0]
    return _csv_bytes(["index", "eigenvalue", "retained"], rows)


def export_eigenvalue_spectrum(model: PcaModel, path: str | os.PathLike) -> None:
    write_atomic(path, spectrum_csv(model))


def geometry_csv(v: np.ndarray) -> bytes:
    return _csv_bytes(["x", "y", "z"], (tuple(float(c) for c in p) for p in unvec(v)))


def export_geometry(v: np.ndarray, path: str | os.PathLike) -> None:
    """Write a design vector as ``x,y,z`` rows (mean, centered sample or eigengeometry)."""
    write_atomic(path, geometry_csv(v))


def read_geometry(path: str | os.PathLike) -> np.ndarray:
    """``(n, 3)`` cloud from an ``x,y,z`` CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip().lower() for c in rows[0]] != ["x", "y", "z"]:
        raise ValueError(f"{path}: expected an x,y,z header")
    return np.array([[float(c) for c in r] for r in rows[1:]], dtype=np.float64).reshape(-1, 3)


def read_spectrum(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    lam = np.array([float(r[1]) for r in rows])
    flags = np.array([int(r[2]) for r in rows], dtype=bool)
    return lam, flags


# --------------------------------------------------------------------------
# estimation error study
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    label: str
    requested: int
    r: int


def r_presets(k: int, t95: int, n_components: int,
              labels: Sequence[str] = PRESET_LABELS) -> list[Preset]:
    """Retained-component counts for the error study.

    ``t95`` is dropped when it equals ``k``.  Requests above the number of
    stored components are clipped with a warning.
    """
    wanted = {"k": k, "t95": t95, "200": 200}
    out = []
    for label in labels:
        if label not in wanted:
            raise ValueError(f"unknown preset {label!r}; choose from {', '.join(wanted)}")
        if label == "t95" and t95 == k:
            continue
        req = wanted[label]
        r = min(req, n_components)
        if r < req:
            log.warning("preset %s: r=%d clipped to %d available components", label, req, r)
        if r < 1:
            raise ValueError(f"preset {label}: no components available")
        out.append(Preset(label, req, r))
    return out


def error_report(pmaps: Mapping[str, ParameterMap], model: PcaModel,
                 X_test: np.ndarray, P_test: np.ndarray) -> list[ErrorSummary]:
    return [estimation_error(pm, model, X_test, P_test, label=label) for label, pm in pmaps.items()]


def errors_csv(class_name: str, param_names: Sequence[str], summaries: Sequence[ErrorSummary]) -> bytes:
    rows = []
    for s in summaries:
        for j, pname in enumerate(param_names):
            rows.append((class_name, s.label, s.r, pname, float(s.mean_abs[j]), float(s.max_abs[j])))
    return _csv_bytes(["class", "preset", "r", "parameter", "mean_abs_error", "max_abs_error"], rows)


def errors_json(class_name: str, param_names: Sequence[str], summaries: Sequence[ErrorSummary]) -> bytes:
    doc = {
        "class": class_name,
        "parameters": list(param_names),
        "presets": [
            {"label": s.label, "r": s.r,
             "mean_abs_error": [float(v) for v in s.mean_abs],
             "max_abs_error": [float(v) for v in s.max_abs]}
            for s in summaries
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# one class end to end
# --------------------------------------------------------------------------

@dataclass
class ClassAnalysis:
    dataset: Dataset
    split: Split
    model: PcaModel
    presets: list[Preset]
    maps: dict[str, ParameterMap]
    errors: list[ErrorSummary] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.dataset.spec.name

    def crv_row(self, thresholds: Sequence[float] = THRESHOLDS) -> CrvRow:
        return CrvRow(self.name, self.dataset.spec.k,
                      tuple(min_components(self.model, t) for t in thresholds))


def analyze(ds: Dataset, split_seed: int = 0, train_fraction: float = 0.9,
            labels: Sequence[str] = PRESET_LABELS) -> ClassAnalysis:
    """Fit PCA on the training split, maps for every preset, and errors on the test split."""
    sp = split(ds, train_fraction, split_seed)
    X_train, P_train = ds.subset(sp.train)
    X_test, P_test = ds.subset(sp.test)
    model = fit_pca(X_train)
    t95 = min_components(model, 0.95) if model.rank else 0
    presets = r_presets(ds.spec.k, t95, model.n_components, labels)
    maps = {p.label: fit_parameter_map(model, X_train, P_train, p.r) for p in presets}
    errors = error_report(maps, model, X_test, P_test)
    return ClassAnalysis(ds, sp, model, presets, maps, errors)


def write_class_report(result: ClassAnalysis, out_dir: str | os.PathLike, n_eigen: int = 3) -> list[Path]:
    """Spectrum, mean/centered/eigen geometries and error tables for one class."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, name = result.model, result.name
    names = result.dataset.spec.param_names
    files = {
        "spectrum.csv": spectrum_csv(model),
        "mean_geometry.csv": geometry_csv(model.mean),
        "errors.csv": errors_csv(name, names, result.errors),
        "errors.json": errors_json(name, names, result.errors),
    }
    X_train, _ = result.dataset.subset(result.split.train[:1])
    files["centered_geometry.csv"] = geometry_csv(X_train[:, 0] - model.mean)
    for i in range(min(n_eigen, model.n_components)):
        files[f"eigengeometry_{i + 1}.csv"] = geometry_csv(model.eigenvectors[:, i])
    written = []
    for fname, data in files.items():
        write_atomic(out / fname, data)
        written.append(out / fname)
    return written

"""Dataset assembly, train/test splitting and the binary container format.

Container layout (all integers little-endian)::

    b"EGPC"                magic
    u32   format version   (FORMAT_VERSION)
    u32   kind             (1 dataset, 2 PCA model, 3 parameter map, 4 joint model)
    u16 + utf-8            geometry class name
    u32   k                parameter count
    u32   n                points per cloud
    u64   m                sample count
    u64   seed
    u32 + utf-8            JSON metadata (sorted keys)
    u32   array count
    per array:
        u16 + utf-8        name
        u8                 ndim
        ndim * u64         shape
        float64 LE data    C order
    u64   checksum         first 8 bytes of BLAKE2b over everything above
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ChecksumError, FormatError, VersionError
from .estimation import JointPcaModel, MassWeightConfig, ParameterMap
from .geometry import GeometryClassSpec, generate, sample_parameters
from .pca import PcaModel, data_matrix

MAGIC = b"EGPC"
FORMAT_VERSION = 1

KIND_DATASET = 1
KIND_PCA = 2
KIND_MAP = 3
KIND_JOINT = 4
_KIND_NAMES = {KIND_DATASET: "dataset", KIND_PCA: "pca", KIND_MAP: "map", KIND_JOINT: "joint"}


@dataclass(frozen=True)
class Dataset:
    spec: GeometryClassSpec
    params: np.ndarray  # (m, k)
    clouds: np.ndarray  # (m, n, 3)
    seed: int
    created: float | None = None

    @property
    def m(self) -> int:
        return self.params.shape[0]

    @property
    def X(self) -> np.ndarray:
        """Data matrix ``(3n, m)``."""
        return data_matrix(self.clouds)

    @property
    def P(self) -> np.ndarray:
        """Parameter matrix ``(k, m)``."""
        return self.params.T

    def subset(self, indices) -> tuple[np.ndarray, np.ndarray]:
        """``(X, P)`` restricted to the given sample indices."""
        idx = np.asarray(indices)
        return data_matrix(self.clouds[idx]), self.params[idx].T


def build_dataset(spec: GeometryClassSpec, m: int, seed: int) -> Dataset:
    if m < 2:
        raise ValueError(f"a dataset needs m >= 2 samples, got {m}")
    params = sample_parameters(spec, seed, m)
    clouds = np.stack([generate(spec, p) for p in params])
    return Dataset(spec=spec, params=params, clouds=clouds, seed=int(seed))


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    test: np.ndarray


def split(m: int | Dataset, train_fraction: float = 0.9, seed: int = 0) -> Split:
    """Seeded permutation of ``0..m-1``; the first ``floor(fraction * m)`` indices train."""
    if isinstance(m, Dataset):
        m = m.m
    if not 0 < train_fraction < 1:
        raise ValueError(f"train fraction must lie in (0, 1), got {train_fraction}")
    n_train = math.floor(train_fraction * m + 1e-9)
    if n_train < 1 or n_train >= m:
        raise ValueError(f"fraction {train_fraction} of m={m} leaves an empty part")
    perm = np.random.default_rng([int(seed), int(m)]).permutation(m)
    return Split(train=perm[:n_train], test=perm[n_train:])


# --------------------------------------------------------------------------
# container
# --------------------------------------------------------------------------

def _pack_str(s: str, fmt: str = "<H") -> bytes:
    b = s.encode("utf-8")
    return struct.pack(fmt, len(b)) + b


def _checksum(payload: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def encode_container(kind: int, header: dict, meta: dict, arrays: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", FORMAT_VERSION, kind))
    buf.write(_pack_str(header.get("class_name", "")))
    buf.write(struct.pack("<IIQQ", header.get("k", 0), header.get("n", 0),
                          header.get("m", 0), header.get("seed", 0)))
    buf.write(_pack_str(json.dumps(meta, sort_keys=True, separators=(",", ":")), "<I"))
    buf.write(struct.pack("<I", len(arrays)))
    for name, arr in arrays.items():
        a = np.ascontiguousarray(arr, dtype="<f8")
        buf.write(_pack_str(name))
        buf.write(struct.pack("<B", a.ndim))
        buf.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        buf.write(a.tobytes())
    payload = buf.getvalue()
    return payload + struct.pack("<Q", _checksum(payload))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise FormatError("unexpected end of container")
        out = self.data[self.pos:self.pos + size]
        self.pos += size
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self, fmt: str = "<H") -> str:
        (size,) = self.unpack(fmt)
        return self.take(size).decode("utf-8")


def decode_container(data: bytes) -> tuple[int, dict, dict, dict[str, np.ndarray]]:
    if len(data) < 12 or data[:4] != MAGIC:
        raise FormatError("not an EGPC container (bad magic)")
    version, kind = struct.unpack("<II", data[4:12])
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported container version {version} (expected {FORMAT_VERSION})")
    if len(data) < 20 or _checksum(data[:-8]) != struct.unpack("<Q", data[-8:])[0]:
        raise ChecksumError("container checksum mismatch (truncated or corrupted file)")
    rd = _Reader(data[:-8])
    rd.take(12)
    header = {"class_name": rd.string()}
    header["k"], header["n"], header["m"], header["seed"] = rd.unpack("<IIQQ")
    meta = json.loads(rd.string("<I"))
    (count,) = rd.unpack("<I")
    arrays = {}
    for _ in range(count):
        name = rd.string()
        (ndim,) = rd.unpack("<B")
        shape = rd.unpack(f"<{ndim}Q")
        size = int(np.prod(shape)) if ndim else 1
        arrays[name] = np.frombuffer(rd.take(8 * size), dtype="<f8").reshape(shape).astype(np.float64)
    if rd.pos != len(rd.data):
        raise FormatError("trailing bytes in container")
    return kind, header, meta, arrays


def write_atomic(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# typed save / load
# --------------------------------------------------------------------------

def _spec_meta(spec: GeometryClassSpec) -> dict:
    return {
        "param_names": list(spec.param_names),
        "ranges": [list(r) for r in spec.ranges],
        "n_points": spec.n_points,
        "fixed_constants": dict(spec.fixed_constants),
    }


def _spec_from(header: dict, meta: dict) -> GeometryClassSpec:
    s = meta["spec"]
    return GeometryClassSpec(
        name=header["class_name"],
        param_names=tuple(s["param_names"]),
        ranges=tuple(tuple(r) for r in s["ranges"]),
        n_points=s["n_points"],
        fixed_constants=s["fixed_constants"],
    )


def encode(obj: Any, provenance: dict | None = None) -> bytes:
    """Container bytes for a Dataset, PcaModel, ParameterMap or JointPcaModel.

    ``provenance`` fills the header fields (class_name, k, n, m, seed) for
    non-dataset objects.
    """
    header = dict(provenance or {})
    if isinstance(obj, Dataset):
        header = {"class_name": obj.spec.name, "k": obj.spec.k, "n": obj.spec.n_points,
                  "m": obj.m, "seed": obj.seed}
        meta = {"spec": _spec_meta(obj.spec), "created": obj.created}
        return encode_container(KIND_DATASET, header, meta,
                                {"params": obj.params, "clouds": obj.clouds})
    if isinstance(obj, PcaModel):
        return encode_container(KIND_PCA, header, {"m": obj.m, "rank": obj.rank}, {
            "mean": obj.mean, "eigenvalues": obj.eigenvalues, "eigenvectors": obj.eigenvectors})
    if isinstance(obj, ParameterMap):
        meta = {"r": obj.r, "active": obj.active, "model_id": obj.model_id}
        return encode_container(KIND_MAP, header, meta, {"H": obj.H, "param_mean": obj.param_mean})
    if isinstance(obj, JointPcaModel):
        return encode_container(KIND_JOINT, header, {"m": obj.m}, {
            "mean_x": obj.mean_x, "mean_p": obj.mean_p, "V": obj.V, "H": obj.H,
            "eigenvalues": obj.eigenvalues, "masses": obj.config.masses,
            "weights": obj.config.weights})
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def decode(data: bytes) -> tuple[Any, dict]:
    """Inverse of :func:`encode`; returns ``(object, header)``."""
    kind, header, meta, a = decode_container(data)
    if kind == KIND_DATASET:
        obj = Dataset(spec=_spec_from(header, meta), params=a["params"], clouds=a["clouds"],
                      seed=header["seed"], created=meta.get("created"))
    elif kind == KIND_PCA:
        obj = PcaModel(mean=a["mean"], eigenvalues=a["eigenvalues"],
                       eigenvectors=a["eigenvectors"], m=meta["m"], rank=meta["rank"])
    elif kind == KIND_MAP:
        obj = ParameterMap(H=a["H"], param_mean=a["param_mean"], r=meta["r"],
                           active=meta["active"], model_id=meta["model_id"])
    elif kind == KIND_JOINT:
        obj = JointPcaModel(mean_x=a["mean_x"], mean_p=a["mean_p"], V=a["V"], H=a["H"],
                            eigenvalues=a["eigenvalues"],
                            config=MassWeightConfig(a["masses"], a["weights"]), m=meta["m"])
    else:
        raise FormatError(f"unknown container kind {kind}")
    return obj, header


def save(obj: Any, path: str | os.PathLike, provenance: dict | None = None) -> None:
    write_atomic(path, encode(obj, provenance))


def load(path: str | os.PathLike, expect: type | None = None) -> Any:
    obj, _ = decode(Path(path).read_bytes())
    if expect is not None and not isinstance(obj, expect):
        raise FormatError(f"{path}: expected {expect.__name__}, found {type(obj).__name__}")
    return obj


def load_with_header(path: str | os.PathLike) -> tuple[Any, dict]:
    return decode(Path(path).read_bytes())


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def format_real(x: float) -> str:
    """Shortest decimal that parses back to the same double."""
    return repr(float(x))


def params_csv(ds: Dataset) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ds.spec.param_names)
    for row in ds.params:
        w.writerow([format_real(v) for v in row])
    return out.getvalue()


def export_params_csv(ds: Dataset, path: str | os.PathLike) -> None:
    write_atomic(path, params_csv(ds).encode("utf-8"))

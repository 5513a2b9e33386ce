import json
import re

import numpy as np
import pytest

from geopca import dataset as dsio
from geopca.cli import main
from geopca.dataset import split
from geopca.pca import PcaModel
from geopca.report import export_geometry


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def helix_run(workdir):
    ds_path = workdir / "sh.egpc"
    assert main(["gen", "--class", "simplified_helix", "--m", "400", "--seed", "3", "--out", str(ds_path)]) == 0
    assert main(["fit", "--dataset", str(ds_path), "--split-seed", "3", "--out", str(workdir / "fit")]) == 0
    return ds_path, workdir / "fit"


def test_gen_writes_dataset(tmp_path, capsys):
    out = tmp_path / "r.egpc"
    assert main(["gen", "--class", "rectangle", "--m", "2000", "--seed", "7", "--out", str(out)]) == 0
    assert dsio.load(out).m == 2000
    assert "class=rectangle k=2 n=200 m=2000 seed=7" in capsys.readouterr().out
    out2 = tmp_path / "r2.egpc"
    main(["gen", "--class", "rectangle", "--m", "2000", "--seed", "7", "--out", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_gen_unknown_class(tmp_path, capsys):
    assert main(["gen", "--class", "sphere", "--out", str(tmp_path / "x")]) == 2
    err = capsys.readouterr().err
    assert "rectangle" in err and "tube" in err


def test_fit_prints_crv(tmp_path, capsys):
    ds = tmp_path / "r.egpc"
    main(["gen", "--class", "rectangle", "--m", "500", "--seed", "1", "--out", str(ds)])
    assert main(["fit", "--dataset", str(ds), "--out", str(tmp_path / "fit")]) == 0
    assert "t(0.9)=2 t(0.95)=2 t(0.99)=2" in capsys.readouterr().out
    manifest = json.loads((tmp_path / "fit" / "fit.json").read_text())
    assert set(manifest["maps"]) == {"k", "200"}


def test_fit_minimal_dataset(tmp_path, caplog):
    ds = tmp_path / "c.egpc"
    main(["gen", "--class", "cuboid", "--m", "2", "--seed", "1", "--out", str(ds)])
    with caplog.at_level("WARNING"):
        assert main(["fit", "--dataset", str(ds), "--train-fraction", "0.5",
                     "--out", str(tmp_path / "fit")]) == 0
    assert any("rank" in r.message for r in caplog.records)


def test_fit_explicit_r_beyond_rank(tmp_path, capsys):
    ds = tmp_path / "r.egpc"
    main(["gen", "--class", "rectangle", "--m", "100", "--seed", "1", "--out", str(ds)])
    assert main(["fit", "--dataset", str(ds), "--r", "5", "--out", str(tmp_path / "fit")]) == 3
    assert "preset r5" in capsys.readouterr().err


def test_fit_unknown_preset(helix_run, tmp_path):
    ds_path, _ = helix_run
    assert main(["fit", "--dataset", str(ds_path), "--presets", "k,x", "--out", str(tmp_path)]) == 2


def test_estimate_training_sample(helix_run, tmp_path, capsys):
    ds_path, fit_dir = helix_run
    ds = dsio.load(ds_path)
    idx = split(ds, 0.9, 3).train[5]
    cloud = tmp_path / "c.csv"
    export_geometry(ds.X[:, idx], cloud)
    capsys.readouterr()
    assert main(["estimate", "--model", str(fit_dir / "model.egpc"), "--map", str(fit_dir / "map_k.egpc"),
                 "--cloud", str(cloud)]) == 0
    printed = dict(re.findall(r"(\w+) = (\S+)", capsys.readouterr().out))
    np.testing.assert_allclose([float(printed["r"]), float(printed["h"])], ds.params[idx], atol=1e-6)


def test_estimate_mean_geometry(helix_run, tmp_path, capsys):
    _, fit_dir = helix_run
    model = dsio.load(fit_dir / "model.egpc", PcaModel)
    pmap = dsio.load(fit_dir / "map_k.egpc")
    cloud = tmp_path / "mean.csv"
    export_geometry(model.mean, cloud)
    capsys.readouterr()
    main(["estimate", "--model", str(fit_dir / "model.egpc"), "--map", str(fit_dir / "map_k.egpc"),
          "--cloud", str(cloud)])
    printed = dict(re.findall(r"(\w+) = (\S+)", capsys.readouterr().out))
    np.testing.assert_allclose([float(printed["r"]), float(printed["h"])], pmap.param_mean, atol=1e-9)


def test_estimate_wrong_size(helix_run, tmp_path):
    _, fit_dir = helix_run
    cloud = tmp_path / "small.csv"
    export_geometry(np.zeros(30), cloud)
    assert main(["estimate", "--model", str(fit_dir / "model.egpc"), "--map", str(fit_dir / "map_k.egpc"),
                 "--cloud", str(cloud)]) == 3


def test_verify_exit_codes(helix_run, capsys):
    ds_path, _ = helix_run
    assert main(["verify", "--dataset", str(ds_path), "--configs", "3", "--tol", "1e-10"]) == 0
    assert main(["verify", "--dataset", str(ds_path), "--configs", "1", "--tol", "0"]) == 1
    capsys.readouterr()
    assert main(["verify", "--dataset", str(ds_path), "--configs", "1", "--identity"]) == 0
    dev = float(re.search(r"operator deviation=(\S+)", capsys.readouterr().out).group(1))
    assert dev < 1e-12


def test_corrupt_dataset_is_data_error(tmp_path):
    bad = tmp_path / "bad.egpc"
    bad.write_bytes(b"EGPC" + bytes(30))
    assert main(["fit", "--dataset", str(bad), "--out", str(tmp_path / "f")]) == 3


def test_report_creates_dir_and_is_idempotent(helix_run, tmp_path):
    _, fit_dir = helix_run
    out = tmp_path / "deep" / "report"
    assert main(["report", "--fit-dir", str(fit_dir), "--out", str(out)]) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["report", "--fit-dir", str(fit_dir), "--out", str(out)]) == 0
    assert first == {p.name: p.read_bytes() for p in out.iterdir()}
    assert (out / "crv_table.csv").read_text().splitlines()[1] == "simplified_helix,2,2,2,2"


def test_pipeline_env_default_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GEOPCA_OUT_DIR", str(tmp_path / "env"))
    assert main(["pipeline", "--m", "60", "--seed", "2", "--classes", "rectangle,tube"]) == 0
    out = tmp_path / "env" / "pipeline"
    assert (out / "crv_table.csv").exists()
    assert (out / "tube" / "report" / "errors.csv").exists()


def test_pipeline_unknown_class(tmp_path):
    assert main(["pipeline", "--classes", "blob", "--out", str(tmp_path)]) == 2

import numpy as np
import pytest

from geopca.dataset import build_dataset, split
from geopca.geometry import CLASSES
from geopca.pca import fit_pca

SEED = 20240607


class ClassData:
    """A 2000-sample dataset of one class with its 9:1 split and fitted PCA."""

    def __init__(self, name, m=2000, seed=SEED):
        self.spec = CLASSES[name]
        self.ds = build_dataset(self.spec, m, seed)
        self.split = split(self.ds, 0.9, seed)
        self.X_train, self.P_train = self.ds.subset(self.split.train)
        self.X_test, self.P_test = self.ds.subset(self.split.test)
        self.model = fit_pca(self.X_train)


_cache = {}


@pytest.fixture(scope="session")
def class_data():
    def get(name):
        if name not in _cache:
            _cache[name] = ClassData(name)
        return _cache[name]
    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)

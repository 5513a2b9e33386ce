"""PCA on vectorized point clouds and recovery of the design parameters behind them."""
from .dataset import Dataset, Split, build_dataset, load, save, split
from .errors import ChecksumError, FormatError, RankError, ShapeError, UndefinedMeasureError, VersionError
from .estimation import (EquivalenceReport, JointPcaModel, MassWeightConfig, ParameterMap, estimate,
                         estimate_joint, fit_joint_pca, fit_parameter_map, verify_equivalence)
from .geometry import CLASSES, FIRST_SET, SECOND_SET, GeometryClassSpec, generate, get_class
from .pca import PcaModel, crv, data_matrix, fit_pca, min_components, project, reconstruct, unvec, vec
from .report import analyze, crv_table

__version__ = "0.1.0"

"""Privilege-controlled 3D point-cloud release workbench."""

__version__ = "0.1.0"

from .attacker import AttackerProfile, Hypothesis, ScoreDistribution, d2_descriptor, hypothesize_topn
from .config import ExperimentConfig
from .errors import WorkbenchError
from .geometry import Aabb, DegenerateCloud, PointCloud, aabb, chamfer, hull_area_2d, iou, normalize
from .harness import evaluate_one, load_run_state, run_experiment
from .planes import PlanePatch, RansacParams, plane_error_components, ransac_horizontal_plane
from .privacy import baseline_privacy, likelihood, pi1, pi2
from .regen import PrivilegeLevel, RegenSpec, privilege_to_epoch, surrogate_regenerate
from .utility import MinMaxStats, auc_privacy_utility, fit_minmax, q1_bbox, q2

__all__ = [
    "Aabb",
    "AttackerProfile",
    "DegenerateCloud",
    "ExperimentConfig",
    "Hypothesis",
    "MinMaxStats",
    "PlanePatch",
    "PointCloud",
    "PrivilegeLevel",
    "RansacParams",
    "RegenSpec",
    "ScoreDistribution",
    "WorkbenchError",
    "aabb",
    "auc_privacy_utility",
    "baseline_privacy",
    "chamfer",
    "d2_descriptor",
    "evaluate_one",
    "fit_minmax",
    "hull_area_2d",
    "hypothesize_topn",
    "iou",
    "likelihood",
    "load_run_state",
    "normalize",
    "pi1",
    "pi2",
    "privilege_to_epoch",
    "q1_bbox",
    "q2",
    "ransac_horizontal_plane",
    "run_experiment",
    "surrogate_regenerate",
    "__version__",
]

from .forest import ForestConfig, RandomForest, fit_forest
from .gbt import GbtConfig, GradientBoostedTrees, fit_gbt
from .persistence import load_model, save_model
from .pipeline import REPORT_NAMES, ScaledModel, SurrogateSuite, predict
from .scaling import MinMaxScaler
from .stacking import BaseConfigs, MetaLearner, StackedModel, fit_meta, fit_stacked
from .svr import SvrConfig, SvrConvergenceError, SvrModel, fit_svr
from .tree import RegressionTree, TreeNode, fit_tree

__all__ = [
    "BaseConfigs",
    "ForestConfig",
    "GbtConfig",
    "GradientBoostedTrees",
    "MetaLearner",
    "MinMaxScaler",
    "REPORT_NAMES",
    "RandomForest",
    "RegressionTree",
    "ScaledModel",
    "StackedModel",
    "SurrogateSuite",
    "SvrConfig",
    "SvrConvergenceError",
    "SvrModel",
    "TreeNode",
    "fit_forest",
    "fit_gbt",
    "fit_meta",
    "fit_stacked",
    "fit_svr",
    "fit_tree",
    "load_model",
    "predict",
    "save_model",
]

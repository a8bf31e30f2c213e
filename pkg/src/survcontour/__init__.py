"""Survival model fitting and (time x predictor) contour surfaces."""

from .bootstrap import BootstrapCI, bootstrap_ci
from .contour import (
    ContourSurface,
    QuantileCurves,
    Surface3D,
    build_quantile_curves,
    build_stratified_panels,
    build_surface,
    to_surface3d,
)
from .cox import CoxFit, fit_cox, predict_survival
from .dataset import (
    AdjusterProfile,
    ColumnRoles,
    IngestionReport,
    SurvivalDataset,
    default_adjuster_profile,
    ingest_csv,
    serialize_csv,
    summarize,
)
from .errors import (
    DataError,
    ModelValidationError,
    NonconvergenceError,
    SurvContourError,
)
from .fine_gray import FineGrayFit, fit_fine_gray, predict_cif
from .metrics import MetricsReport, c_index, default_brier_horizon, integrated_brier
from .nonparametric import (
    KMEstimate,
    aalen_johansen,
    censoring_km,
    kaplan_meier,
    logrank_statistic,
    median_split_km,
    nelson_aalen,
)
from .parametric import ParametricFit, fit_parametric, predict_survival_parametric
from .registry import ModelSpec, Recommendation, fit, recommend, validate
from .rsf import ForestFit, fit_rsf, predict_survival_rsf
from .stepfun import StepFunction

__version__ = "0.1.0"

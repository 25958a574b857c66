"""Robust directional variogram estimation on regular grids.

Matheron, Genton (Qn-based), and minimum-covariance-determinant variogram
estimators that fit several lags jointly, with a Gaussian random-field
simulator, outlier injectors, closed-form breakdown points, and a
Monte-Carlo study harness.
"""

from .breakdown import BreakdownQuery, breakdown_point, empirical_breakdown_check
from .contamination import ContaminationSpec, contaminate, contaminate_block, contaminate_isolated
from .errors import (
    AscFormatError,
    EmptySampleError,
    EstimatorUnusableError,
    InputError,
    NoValidPartitionError,
    NotPositiveDefiniteError,
    NumericalError,
    RobustVarioError,
    SampleTooSmallError,
    SingularDataError,
    TooManyFailuresError,
)
from .estimators import (
    ESTIMATOR_IDS,
    ModConfig,
    VariogramEstimate,
    apply_correction,
    genton,
    matheron,
    mcd_diff,
    mcd_mod,
    mcd_org,
)
from .grid import (
    Direction,
    Grid,
    LagSet,
    VectorSample,
    build_lag_set,
    extract_diff_vectors,
    extract_org_vectors,
    lag_differences,
)
from .ascio import AscHeader, apply_quality_mask, load_asc, save_asc, standardize
from .mcd import McdConfig, McdFit, exact_mcd, fast_mcd, mcd_consistency_factor, reweight_mcd
from .numerics import RngStream, chisq_cdf, chisq_quantile, cholesky_factor, mahalanobis_sq
from .scale import QnConfig, qn, qn_raw
from .simfield import FieldSpec, field_cholesky, simulate_field
from .study import (
    CorrfacResult,
    StudyResult,
    StudySpec,
    default_lag_depths,
    run_bias_rmse_study,
    run_correction_factor_study,
)
from .variomodel import AnisoModel, IsoModel, aniso_variogram, iso_variogram, model_covariance, parse_model

__version__ = "0.1.0"

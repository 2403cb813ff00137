"""Numerical laboratory for self-intersection local time derivatives of fBm."""

__version__ = "0.1.0"

from .fbm import (
    FbmPath,
    GenerationMethod,
    HurstModel,
    TimeGrid,
    fbm_covariance,
    fgn_autocovariance,
    generate_ensemble,
    generate_path,
)
from .mollifier import MollifierParams, f_eps, f_eps_deriv, hermite_he
from .moments import (
    Ordering,
    PairGeometry,
    PairMoments,
    PrefactorMode,
    chaos_coefficient,
    chaos_inner_kernel,
    lemma_lower_bound_gap,
    mu_bridge,
    mu_exact,
    pair_kernel,
    pair_moments,
)
from .quadrature import (
    AccuracyWarning,
    MuConvention,
    QuadratureBudgetError,
    QuadResult,
    QuadSpec,
    VarianceBreakdown,
    ac_factor,
    b_factor,
    b_factor_truncated,
    critical_variance_d2,
    first_chaos_variance,
    integrate_adaptive,
    lemma23_i,
    lemma23_i_ratio,
    lemma23_ii,
    lemma23_ii_ratio,
    power_for_hurst,
    scale_factor,
    sigma_squared,
    v3_factorized_limit,
    variance_pieces,
)
from .estimator import (
    ContractionMode,
    EstimatorRequest,
    EstimatorValue,
    Scheme,
    dslt,
    dslt_ensemble,
    first_chaos,
    first_chaos_ensemble,
    slt,
    slt_ensemble,
)
from .experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    LadderResult,
    LadderRow,
    NormalityStats,
    emit_results,
    load_config_file,
    normality_stats,
    resolve_threads,
    run_clt_ladder,
    run_existence_sweep,
)
from .pathfile import read_path, write_path

"""Randomization inference for 2x2 split-plot and completely randomized
factorial experiments.

The heavy lifting lives in the compiled extension ``splitplot._core``; this
package re-exports its public surface.
"""

from splitplot._core import (  # noqa: F401
    AdditivityReport,
    AdditivityType,
    Assignment,
    BlockLayout,
    CompletelyRandomizedSpec,
    ConfidenceIntervals,
    CovarianceSummary,
    CoverageCell,
    CoverageConfig,
    CoverageReport,
    CoverageRow,
    DesignKind,
    Effect,
    EffectEstimate,
    EnumerationReport,
    ExactMomentsOptions,
    FactorialEffectSummary,
    PoType,
    PomRecipe,
    PotentialOutcomeMatrix,
    Projections,
    ResidualCovMode,
    SamplingMoments,
    SeedStream,
    SpecialCaseReport,
    SplitPlotSpec,
    all_coverage_cells,
    build_pom,
    build_projections,
    classify_additivity,
    closed_form_special_cases,
    confidence_interval,
    count_assignments,
    cr_counterpart,
    estimate_cr,
    estimate_sp,
    estimate_variance_cr,
    estimate_variance_sp,
    exact_moments,
    factorial_effects,
    generate_y1,
    normal_quantile,
    observe,
    point_estimates,
    randomize_cr,
    randomize_sp,
    residual_covariance,
    residuals,
    run_coverage,
    sampling_variance_cr,
    sampling_variance_sp,
    summarize_covariances,
    theoretical_assignment_moments,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

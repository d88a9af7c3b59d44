"""Tools for planning and simulating real/synthetic training-data mixes.

Library surface:

* mercer: spectral kernel eigensystem, series functions, data sampling
* krr: generator-regularized kernel ridge regression and bias-variance
* discrepancy: coefficient-space distances and norms
* bounds: generalization-bound evaluators and ratio planners
* spectral: radial power spectra of images and the plug-in planner
* harness: sweep/contour experiment drivers and CSV/JSON emission
* cli: command-line entry point
"""

from .bounds import (
    BoundaryMinimum,
    BoundParams,
    KernelBoundInputs,
    RatioPlan,
    TraditionalPlan,
    UnboundedRegularization,
    domain_shift_gap_bound,
    domain_shift_kernel_bound,
    golden_section_min,
    kernel_bound,
    lambda_star_closed_form,
    lambda_star_numeric,
    mixed_gap_bound,
    ratio_to_tilde,
    rho,
    stability_constant,
    tilde_to_ratio,
    traditional_plan,
)
from .discrepancy import DiscrepancyResult, discrepancy, l2_norm2, rkhs_norm2
from .harness import (
    ContourGrid,
    SweepResult,
    UcurveConfig,
    emit,
    emit_contour,
    load_config,
    run_bias_variance,
    run_contour,
    run_ucurve,
)
from .krr import (
    BiasVarianceReport,
    KRRSolution,
    bias_variance_mc,
    empirical_l2_error,
    fit,
    population_limit_coeffs,
    predict,
)
from .mercer import (
    EigenSpec,
    SeriesFunction,
    TrainingSet,
    basis_eval,
    kernel_matrix,
    make_series,
    sample_training_set,
    series_eval,
)
from .spectral import (
    DecayFit,
    ImageMatrix,
    RapsdProfile,
    fit_decay_exponent,
    mean_rapsd,
    plan_from_images,
    rapsd,
    spectral_distance,
)

__version__ = "0.1.0"

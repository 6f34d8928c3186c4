"""Maintenance policy optimisation for weighted sums of gamma degradation processes."""

__version__ = "0.1.0"

from .config import (
    BUNDLED_SCENARIO,
    PolicyPoint,
    Scenario,
    SimSettings,
    bundled_scenario_text,
    dump_scenario,
    load_bundled_scenario,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
    scenario_to_yaml,
)
from .cost import (
    CostKind,
    CostStructure,
    NumericalWarning,
    QuadratureSpec,
    conditional_cost_pdf,
    cost_combination,
    cov_yu,
    expected_variable_cost,
    joint_cf,
)
from .degradation import (
    GammaProcessSpec,
    LinearCombination,
    MoschopoulosExpansion,
    combo_moments,
    gamma_pdf,
    hitting_cdf,
    moschopoulos_expand,
    overall_pdf,
    overall_survival,
    overall_survival_many,
    sample_overall,
    sample_overall_many,
)
from .errors import (
    ConfigError,
    DomainError,
    GammaCbmError,
    InfeasibleError,
    NumericalError,
    TruncationError,
    UnsupportedModelError,
)
from .heterogeneity import (
    ArrivalModel,
    MixedHitting,
    RandomEffectModel,
    arrival_joint_pdf,
    covariate_scale,
    mixed_hitting_prob,
    mixed_hitting_report,
    mixed_hitting_series,
    mixed_joint_density,
    sample_mixed_overall,
    with_covariate_scale,
)
from .orderstat import OrderStatMonitor, order_stat_cdf, r_out_of_n_hitting_cdf
from .policy import (
    ConstantFactor,
    FeasibleSet,
    GridSpec,
    PolicyOptimum,
    PolicySpec,
    RepairModel,
    ScaledExpSaturation,
    cv,
    feasible_set,
    maintained_hitting_cdf,
    optimize,
    q0,
    q0_reduced,
    replacement_bound,
    replacement_bound_satisfied,
    stationarity_residual,
)
from .rng import RngStream
from .simulate import (
    EstimatorKind,
    SimEstimate,
    estimate_cv,
    estimate_from_samples,
    estimate_hitting,
    estimate_q0,
    q0_samples,
)
from .special import (
    beta_fn,
    gamma_cdf,
    log_gamma,
    regularized_lower_gamma,
    regularized_upper_gamma,
    sample_gamma,
    upper_incomplete_gamma,
)

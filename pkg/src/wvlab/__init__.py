"""Wiman-Valiron growth of random power series and weighted backward shifts."""

from .errors import ConfigError, DomainError, InsufficientTruncation, TruncationMargin, WVLabError
from .series import (
    CoefficientSequence,
    evaluate,
    make_exp_series,
    make_geometric_series,
    make_weight_series,
    radius_of_convergence_estimate,
    truncation_index,
)
from .sampler import (
    RandomizedSeries,
    SeedSpec,
    SubgaussianSampler,
    bounded_custom,
    complex_gaussian,
    rademacher,
    randomize,
    sample_sequence,
    shrinking_uniform,
    steinhaus,
    uniform_disk,
)
from .growth import (
    GrowthProfile,
    RadiusGrid,
    g_norm,
    growth_profile,
    max_modulus,
    max_term,
    parseval_check,
    s_norm,
)
from .measure import (
    HWeight,
    IntervalSet,
    MeasureConvention,
    derivative_exceptional_set,
    h_log_measure,
    violation_set,
    witness_radii,
)
from .inequality import (
    BoundKind,
    calibrate_constant,
    check_inequality,
    exponent_fit,
    kahane_experiment,
    levy_trial_suite,
    rhs_bound,
)
from .dynamics import (
    TargetSpec,
    WeightSequence,
    apply_shift,
    chaos_check,
    fhc_growth_check,
    hitting_density,
    orbit_coefficient,
    orbit_distance,
    random_fhc_function,
)

__version__ = "0.1.0"

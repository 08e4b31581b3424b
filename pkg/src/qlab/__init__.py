"""qlab: quasi-entropies, monotone metrics and chi-square divergences on
finite-dimensional matrix algebras, with data-processing certificates,
equality-condition batteries, and structure detection for
divergence-preserving maps."""

from .channels import (
    Channel,
    MultiplicativeDomain,
    SchwarzReport,
    choi_matrix,
    choi_to_kraus,
    diagonal_pinching,
    direct_sum_channel,
    embed_partial_trace,
    multiplicative_domain,
    partial_trace_channel,
    petz_forward,
    petz_recovery,
    pinching_channel,
    random_tpcp,
    restricted_channel,
    schwarz_check,
    smoothing,
    tensor_embed,
    transpose_map,
    unitary_channel,
)
from .entropy import (
    QuasiEntropyValue,
    epsilon_oracle,
    epsilon_regularized,
    j_superoperator,
    quasi_entropy,
    relative_entropy,
    relative_modular,
    standard_f_divergence,
    support_term_equivalence,
)
from .equality import (
    BatteryReport,
    ConditionReport,
    RatioDecomposition,
    check_condition,
    dpi_check,
    group_ratios,
    joint_convexity_equality,
    mixed_order_counterexample,
    prop_commutation_audit,
    ratio_grouped_equality,
    run_battery,
    superop_dpi_check,
)
from .functions import (
    QuadratureConfig,
    RepresentingMeasure,
    SpectralFunction,
    adjoint_star,
    boundary_weighted_eval,
    make_function,
    measure_total_mass,
    normalized_at_one,
    parse_function_spec,
    representing_measure_eval,
    scale,
)
from .linalg import (
    PositiveOperator,
    SuperOperator,
    complex_power,
    generalized_inverse,
    hermitian_eig,
    hs_inner,
    hs_norm,
    left_multiplication,
    matrix_function,
    matrix_units,
    multiplication_superoperator,
    partial_trace,
    right_multiplication,
    support_projection,
    unvec,
    vec,
)
from .metrics import (
    Chi2Value,
    chi2_alpha,
    chi2_divergence,
    chi2_equality_battery,
    kubo_mori_hessian_check,
    metric_duality_gap,
    metric_equality_battery,
    monotone_metric,
    monotone_metric_quadrature,
)
from .scenarios import run_scenario
from .structure import (
    FactorizationCertificate,
    detect_full_multiplicative_domain,
    detect_tensor_embed,
    factorize_embed_partial_trace,
    generated_algebra_dim,
    single_equality_shortcut,
    single_generator,
)

__version__ = "0.1.0"

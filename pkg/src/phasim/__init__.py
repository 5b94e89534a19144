"""Adaptive optical phase estimation with entangled probes or classical light."""

from .campaign import (
    CampaignSpec,
    RunRecord,
    ScalingResult,
    SummaryPoint,
    fit_scaling,
    measurement_budget,
    run_campaign,
)
from .errors import (
    BudgetExceededError,
    BudgetTooSmallError,
    DegenerateFitError,
    DegreeOverflowError,
    EmptyEnsembleError,
    NondeterministicOutcomeError,
    NonUniformDetuningsError,
    PhasimError,
    RegimeViolationError,
    ZeroBeatError,
    ZeroDetuningError,
    ZeroShiftedDetuningError,
)
from .estimator import (
    BayesianPhaseEstimator,
    EstimateResult,
    ProtocolConfig,
    dyadic_estimate,
    holevo_variance,
    holevo_variance_ensemble,
    holevo_variance_of_errors,
    run_protocol,
    signed_phase_error,
)
from .models import (
    ClassicalLightModel,
    DetectorConfig,
    DetectorValidity,
    DyadicPhase,
    IdealNoonModel,
    MeasurementModel,
    Parity,
    accuracy_factor,
    classical_excitation_prob,
    classical_outcome_prob,
    default_detector,
    effective_rabi,
    make_model,
    max_excitation_rate,
    noon_outcome_prob,
    rate_scaling,
    validity_report,
    wrap_phase,
)
from .perturbation import (
    FourLevelParams,
    first_order_full,
    first_order_resonant,
    nonresonant_amplitude_general,
    quadrature_oracle,
    sample_validity_regime,
    second_order_amplitude,
    second_order_factors,
)
from .posterior import FourierPosterior, bayes_update, choose_feedback, expected_sharpness

__version__ = "0.1.0"

__all__ = [
    "BayesianPhaseEstimator",
    "BudgetExceededError",
    "BudgetTooSmallError",
    "CampaignSpec",
    "ClassicalLightModel",
    "DegenerateFitError",
    "DegreeOverflowError",
    "DetectorConfig",
    "DetectorValidity",
    "DyadicPhase",
    "EmptyEnsembleError",
    "EstimateResult",
    "FourLevelParams",
    "FourierPosterior",
    "IdealNoonModel",
    "MeasurementModel",
    "NonUniformDetuningsError",
    "NondeterministicOutcomeError",
    "Parity",
    "PhasimError",
    "ProtocolConfig",
    "RegimeViolationError",
    "RunRecord",
    "ScalingResult",
    "SummaryPoint",
    "ZeroBeatError",
    "ZeroDetuningError",
    "ZeroShiftedDetuningError",
    "accuracy_factor",
    "bayes_update",
    "choose_feedback",
    "classical_excitation_prob",
    "classical_outcome_prob",
    "default_detector",
    "dyadic_estimate",
    "effective_rabi",
    "expected_sharpness",
    "first_order_full",
    "first_order_resonant",
    "fit_scaling",
    "holevo_variance",
    "holevo_variance_ensemble",
    "holevo_variance_of_errors",
    "make_model",
    "max_excitation_rate",
    "measurement_budget",
    "noon_outcome_prob",
    "nonresonant_amplitude_general",
    "quadrature_oracle",
    "rate_scaling",
    "run_campaign",
    "run_protocol",
    "sample_validity_regime",
    "second_order_amplitude",
    "second_order_factors",
    "validity_report",
    "wrap_phase",
]

from .design import (
    criterion_phi,
    design_budget,
    design_grid,
    design_unconstrained,
    monotonicity_report,
    optimize_h,
)
from .expectations import cost_breakdown, expected_counts, termination_distribution, total_cost
from .fisher import (
    asymptotic_covariance,
    fisher_information,
    information_from_counts,
    interval_jacobian,
    std_variance,
)
from .inference import (
    estimate_reliability,
    fit_mle,
    information_criteria,
    log_likelihood,
    score,
    select_model,
)
from .lifetime import (
    cause_mass_gradient,
    cause_masses,
    cumulative_hazard,
    dependence_ratio,
    grad_interval_probs,
    grad_reliability,
    interval_probs,
    log_reliability,
    reliability,
    sub_density,
    sub_survivor,
)
from .plans import acceptance_probability, decide, derive_hypotheses, design_plan, oc_curve, risk_spec
from .simulate import MonteCarloEvaluator, mc_evaluate, simulate_dataset

__all__ = [
    "MonteCarloEvaluator",
    "acceptance_probability",
    "asymptotic_covariance",
    "cause_mass_gradient",
    "cause_masses",
    "cost_breakdown",
    "criterion_phi",
    "cumulative_hazard",
    "decide",
    "dependence_ratio",
    "derive_hypotheses",
    "design_budget",
    "design_grid",
    "design_plan",
    "design_unconstrained",
    "estimate_reliability",
    "expected_counts",
    "fisher_information",
    "fit_mle",
    "grad_interval_probs",
    "grad_reliability",
    "information_criteria",
    "information_from_counts",
    "interval_jacobian",
    "interval_probs",
    "log_likelihood",
    "log_reliability",
    "mc_evaluate",
    "monotonicity_report",
    "oc_curve",
    "optimize_h",
    "reliability",
    "risk_spec",
    "score",
    "select_model",
    "simulate_dataset",
    "std_variance",
    "sub_density",
    "sub_survivor",
    "termination_distribution",
    "total_cost",
]

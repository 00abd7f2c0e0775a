from .data import ObservedData
from .errors import (
    BudgetInfeasibleError,
    ConditioningError,
    ConvergenceError,
    DataConsistencyError,
    DegenerateHypothesesError,
    DesignSingularError,
    ParameterDomainError,
    RaspError,
    RiskSpecificationError,
    SchemeError,
)
from .fit import ConvergenceReport, FitResult, McSummary, ModelComparison, ReliabilityEstimate
from .params import CauseMassVector, FitVariant, ModelParams
from .plan import (
    BudgetDesign,
    BudgetRow,
    Decision,
    DesignGridRow,
    HOptimum,
    MonotonicityReport,
    MonotonicityRow,
    MonotonicityViolation,
    PlanResult,
    RiskSpec,
    UnconstrainedDesign,
)
from .scheme import CostBreakdown, CostParams, ExpectedCounts, PicScheme, TerminationSummary

__all__ = [
    "BudgetDesign",
    "BudgetInfeasibleError",
    "BudgetRow",
    "CauseMassVector",
    "ConditioningError",
    "ConvergenceError",
    "ConvergenceReport",
    "CostBreakdown",
    "CostParams",
    "DataConsistencyError",
    "Decision",
    "DegenerateHypothesesError",
    "DesignGridRow",
    "DesignSingularError",
    "ExpectedCounts",
    "FitResult",
    "FitVariant",
    "HOptimum",
    "McSummary",
    "ModelComparison",
    "ModelParams",
    "MonotonicityReport",
    "MonotonicityRow",
    "MonotonicityViolation",
    "ObservedData",
    "ParameterDomainError",
    "PicScheme",
    "PlanResult",
    "RaspError",
    "ReliabilityEstimate",
    "RiskSpec",
    "RiskSpecificationError",
    "SchemeError",
    "TerminationSummary",
    "UnconstrainedDesign",
]

"""Prior elicitation from an expert's historical binary decisions.

Models the expert's decision process with Bayesian logistic regression,
then approximates the prior for the guarded-against event of a new case
by fitting a distribution to posterior-predictive samples of the
decision probability.
"""

from .analysis import (
    AblationSpec,
    ComparativeReport,
    CounterfactualResult,
    ablate,
    coefficient_relevance,
    counterfactual,
)
from .diagnostics import (
    CaseSummary,
    DiagnosticsReport,
    diagnostics_report,
    five_split_average,
    summarize_case,
    summarize_cases,
)
from .elicit import (
    ElicitedPrior,
    FitReport,
    PredictiveSamples,
    elicit_prior,
    fit_beta_moments,
    fit_logitnormal_mle,
    ks_statistic,
    predictive_samples,
)
from .encoding import CaseEncoder, EncodedDataset, encode
from .errors import (
    ConfigError,
    DataError,
    DecisionPriorError,
    DegenerateFitError,
    NotFittedError,
    SamplerError,
    UnseenLevelWarning,
)
from .estimator import BayesianLogisticRegression
from .ingest import (
    CaseRecord,
    ColumnSpec,
    DecisionRule,
    SplitPlan,
    TableSchema,
    binarize_decision,
    derive_features,
    load_table,
    split_indices,
)
from .model import LogisticModel, PriorSpec, inverse_link, linear_predictor
from .pipeline import ModelSpec, fit_replicate, prepare_records, run_protocol
from .sampler import (
    ConvergenceReport,
    PosteriorChain,
    SamplerConfig,
    convergence,
    run_chain,
    run_chains,
    thin_draws,
)
from .synthbench import Scenario, ScenarioColumn, generate, predictive_oracle

__version__ = "0.1.0"

__all__ = [
    "AblationSpec",
    "BayesianLogisticRegression",
    "CaseEncoder",
    "CaseRecord",
    "CaseSummary",
    "ColumnSpec",
    "ComparativeReport",
    "ConfigError",
    "ConvergenceReport",
    "CounterfactualResult",
    "DataError",
    "DecisionPriorError",
    "DecisionRule",
    "DegenerateFitError",
    "DiagnosticsReport",
    "ElicitedPrior",
    "EncodedDataset",
    "FitReport",
    "LogisticModel",
    "ModelSpec",
    "NotFittedError",
    "PosteriorChain",
    "PredictiveSamples",
    "PriorSpec",
    "SamplerConfig",
    "SamplerError",
    "Scenario",
    "ScenarioColumn",
    "SplitPlan",
    "TableSchema",
    "UnseenLevelWarning",
    "ablate",
    "binarize_decision",
    "coefficient_relevance",
    "convergence",
    "counterfactual",
    "derive_features",
    "diagnostics_report",
    "elicit_prior",
    "encode",
    "fit_beta_moments",
    "fit_logitnormal_mle",
    "fit_replicate",
    "five_split_average",
    "generate",
    "inverse_link",
    "ks_statistic",
    "linear_predictor",
    "load_table",
    "predictive_oracle",
    "predictive_samples",
    "prepare_records",
    "run_chain",
    "run_chains",
    "run_protocol",
    "split_indices",
    "summarize_case",
    "summarize_cases",
    "thin_draws",
]

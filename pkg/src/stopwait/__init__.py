"""Speed-quantity stopping models for question askers: simulation, expansion, estimation."""

from .estimation import (
    CorrelationResult,
    InverseGaussianParams,
    LogitFit,
    fit_inverse_gaussian,
    fit_logit,
    invgauss_cdf,
    invgauss_pdf,
    ks_distance,
    pearson_correlation,
    tail_slope,
)
from .events import QuestionRecord, filter_eligible, open_duration_histogram, parse_event_log, serialize_event_log
from .model import (
    TABLE3,
    CostSpec,
    Decision,
    LogitCoefficients,
    UtilitySpec,
    close_probability,
    expected_wait_cost,
    logistic,
    marginal_benefit,
    myopic_decision,
    utility,
    utility_peak,
)
from .simulate import SimScenario, generate_dataset
from .threshold import (
    StepDistribution,
    brownian_passage_ensemble,
    find_threshold,
    simulate_first_passage,
    solve_value_function,
)
from .visits import VisitObservation, expand_corpus, expand_question, summarize

__version__ = "0.1.0"

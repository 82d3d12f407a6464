"""Real-time user models for next-interaction prediction and exploration-bias
detection, with a session-replay benchmark harness."""

from .core import (
    AttributeSchema,
    BiasScores,
    Dataset,
    InteractionEvent,
    InteractionModel,
    RankScores,
    Session,
    load_dataset,
    load_schema,
    load_sessions,
    rank_of,
    to_ordering,
    validate_dataset,
    validate_session,
)
from .evaluation import bias_timeline, combine_bias, replay, run_benchmark, success_rate, summarize
from .models import (
    AdaptiveContextualization,
    AnalyticFocus,
    AttributeDistribution,
    BoostedNaiveBayes,
    CompetingModels,
    Ensemble,
    HiddenMarkovAttention,
    KNNRelevance,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveContextualization",
    "AnalyticFocus",
    "AttributeDistribution",
    "AttributeSchema",
    "BiasScores",
    "BoostedNaiveBayes",
    "CompetingModels",
    "Dataset",
    "Ensemble",
    "HiddenMarkovAttention",
    "InteractionEvent",
    "InteractionModel",
    "KNNRelevance",
    "RankScores",
    "Session",
    "bias_timeline",
    "combine_bias",
    "load_dataset",
    "load_schema",
    "load_sessions",
    "rank_of",
    "replay",
    "run_benchmark",
    "success_rate",
    "summarize",
    "to_ordering",
    "validate_dataset",
    "validate_session",
]

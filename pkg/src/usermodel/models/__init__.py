from .analytic_focus import AnalyticFocus
from .baseline import RandomRelevance, UniformRelevance
from .bias import AdaptiveContextualization, AttributeDistribution
from .competing import CompetingModels
from .ensemble import Ensemble
from .hmm import HiddenMarkovAttention
from .knn import KNNRelevance
from .naive_bayes import BoostedNaiveBayes

__all__ = [
    "AdaptiveContextualization",
    "AnalyticFocus",
    "AttributeDistribution",
    "BoostedNaiveBayes",
    "CompetingModels",
    "Ensemble",
    "HiddenMarkovAttention",
    "KNNRelevance",
    "RandomRelevance",
    "UniformRelevance",
]

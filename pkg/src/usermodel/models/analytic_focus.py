"""Analytic focus relevance model with exponential forgetting."""

import math

import numpy as np

from ..core import InteractionModel, minmax_rescale
from ..preprocess import DEFAULT_BIN_COUNT, concept_codes, default_bins


def decay(initial, persistence, elapsed):
    """Importance of an action ``elapsed`` steps after it happened."""
    if elapsed < 0:
        raise ValueError("elapsed must be >= 0")
    return initial * math.exp(-elapsed / persistence)


class AnalyticFocus(InteractionModel):
    """Relevance as the product of the decayed importance of a point's concepts.

    A concept is one attribute value (continuous attributes are binned). Each
    interaction adds ``initial`` importance to the concepts of the touched
    point, which then fades as ``exp(-elapsed / persistence)``. Time is the
    event's step index ``t``; queries are evaluated at the latest observed
    step.

    Parameters
    ----------
    initial, persistence : float
        Defaults for any action token not listed in ``actions``.
    actions : dict, optional
        ``{token: {"initial": float, "persistence": float}}`` overrides.
    epsilon : float
        Floor applied to each concept factor so untouched concepts do not
        zero the product.
    n_bins : int
        Equal-width bins per continuous attribute.
    """

    predicts = True

    def __init__(self, initial=1.0, persistence=10.0, actions=None, epsilon=1e-9, n_bins=DEFAULT_BIN_COUNT):
        self.initial = initial
        self.persistence = persistence
        self.actions = actions
        self.epsilon = epsilon
        self.n_bins = n_bins

    def action_params(self, action):
        spec = (self.actions or {}).get(action, {})
        initial = float(spec.get("initial", self.initial))
        persistence = float(spec.get("persistence", self.persistence))
        if initial <= 0 or persistence <= 0:
            raise ValueError(f"action {action!r}: initial and persistence must be positive")
        return initial, persistence

    def _prepare(self, dataset):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.action_params("")
        self.concepts_, self.concept_tokens_ = concept_codes(dataset, default_bins(dataset, self.n_bins))

    def _reset(self):
        self.history_ = []
        # per action: (importance as of step `last`, last)
        self._accumulators = {}

    def _observe(self, row, event):
        initial, persistence = self.action_params(event.action)
        acc, last = self._accumulators.get(event.action, (np.zeros(len(self.concept_tokens_)), event.t))
        if event.t > last:
            acc = acc * math.exp(-(event.t - last) / persistence)
        acc = acc.copy()
        acc[self.concepts_[row]] += initial
        self._accumulators[event.action] = (acc, max(last, event.t))
        self.history_.append((row, event.action, event.t))

    def concept_importance(self, tau=None):
        """Importance of every concept at step ``tau`` (default: latest step)."""
        tau = self.last_t_ if tau is None else tau
        total = np.zeros(len(self.concept_tokens_))
        for action, (acc, last) in sorted(self._accumulators.items()):
            if tau < last:
                raise ValueError(f"tau={tau} precedes observed step {last}")
            _, persistence = self.action_params(action)
            total += acc * math.exp(-(tau - last) / persistence)
        return total

    def importance_of(self, token, tau=None):
        return float(self.concept_importance(tau)[self.concept_tokens_.index(token)])

    def rank_all(self):
        importance = np.maximum(self.concept_importance(), self.epsilon)
        log_score = np.log(importance)[self.concepts_].sum(axis=1)
        return self._rank_scores(minmax_rescale(np.exp(log_score - log_score.max())))

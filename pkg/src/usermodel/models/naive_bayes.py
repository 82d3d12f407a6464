"""Boosted naive Bayes relevance model."""

import math

import numpy as np

from ..core import InteractionModel, minmax_rescale
from ..exceptions import AllPointsPositive, NotObserved
from ..preprocess import DEFAULT_BIN_COUNT, default_bins, discretize


class NaiveBayesLearner:
    """Weighted categorical naive Bayes over integer-coded attributes.

    ``log_prior`` has shape ``(2,)`` and ``log_tables[j]`` shape ``(2, m_j)``,
    indexed by class then level.
    """

    def __init__(self, log_prior, log_tables):
        self.log_prior = log_prior
        self.log_tables = log_tables

    @classmethod
    def fit(cls, X, y, levels, alpha=1.0, sample_weight=None):
        X = np.asarray(X, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        w = w * (len(y) / w.sum())
        class_w = np.array([w[y == 0].sum(), w[y == 1].sum()])
        with np.errstate(divide="ignore"):
            log_prior = np.log(class_w / class_w.sum())
        tables = []
        for j, m in enumerate(levels):
            counts = np.zeros((2, m))
            np.add.at(counts, (y, X[:, j]), w)
            tables.append(np.log((counts + alpha) / (class_w[:, None] + alpha * m)))
        return cls(log_prior, tables)

    def log_joint(self, X):
        """Log of prior times product of conditionals, shape ``(n, 2)``."""
        X = np.asarray(X, dtype=np.int64)
        out = np.tile(self.log_prior, (len(X), 1))
        for j, table in enumerate(self.log_tables):
            out += table[:, X[:, j]].T
        return out

    def log_odds(self, X):
        lj = self.log_joint(X)
        return lj[:, 1] - lj[:, 0]


def boost(X, y, levels, n_rounds, alpha=1.0):
    """Two-class SAMME over naive Bayes base learners.

    Returns ``(learners, weights)``. Boosting stops early on a perfect
    learner or one no better than chance; the first learner is always kept
    so a single round reduces to plain naive Bayes.
    """
    n = len(y)
    w = np.full(n, 1.0 / n)
    learners, weights = [], []
    for _ in range(n_rounds):
        nb = NaiveBayesLearner.fit(X, y, levels, alpha, w)
        miss = (nb.log_odds(X) > 0).astype(np.int64) != y
        err = float(w[miss].sum())
        if err >= 0.5:
            if not learners:
                learners.append(nb)
                weights.append(1.0)
            break
        err = max(err, 1e-10)
        a = math.log((1.0 - err) / err)
        learners.append(nb)
        weights.append(a)
        if not miss.any():
            break
        w = w * np.exp(a * miss)
        w /= w.sum()
    return learners, np.array(weights)


class BoostedNaiveBayes(InteractionModel):
    """Relevance from an AdaBoost (SAMME) ensemble of naive Bayes classifiers.

    Interacted points are positives; ``negative_ratio`` times as many
    negatives are drawn uniformly from points never interacted with. The
    ensemble is refit lazily on the first query after new observations.
    Each learner votes with half its log-odds, weighted by its SAMME weight,
    and the summed margin is min-max rescaled.
    """

    predicts = True

    def __init__(self, n_rounds=10, negative_ratio=1.0, alpha=1.0, n_bins=DEFAULT_BIN_COUNT, random_state=0):
        self.n_rounds = n_rounds
        self.negative_ratio = negative_ratio
        self.alpha = alpha
        self.n_bins = n_bins
        self.random_state = random_state

    def _prepare(self, dataset):
        if self.n_rounds < 1 or self.negative_ratio <= 0 or self.alpha <= 0:
            raise ValueError("n_rounds >= 1, negative_ratio > 0 and alpha > 0 required")
        self.codes_, self.levels_ = discretize(dataset, default_bins(dataset, self.n_bins))

    def _reset(self):
        self.positives_ = []
        self.learners_ = None
        self.learner_weights_ = None

    def _observe(self, row, event):
        self.positives_.append(row)
        self.learners_ = None

    def sample_negatives(self):
        pos = np.asarray(self.positives_, dtype=np.int64)
        unseen = np.setdiff1d(np.arange(self.dataset_.n), pos)
        if unseen.size == 0:
            raise AllPointsPositive("every point has been interacted with; no negatives to sample")
        n_neg = min(math.ceil(self.negative_ratio * len(pos)), unseen.size)
        # seeded by observation count so refits do not depend on query timing
        rng = np.random.default_rng([int(self.random_state), len(pos)])
        return np.sort(rng.choice(unseen, size=n_neg, replace=False))

    def fit_ensemble(self):
        if not self.positives_:
            raise NotObserved("boosted naive Bayes needs at least one observation")
        pos = np.asarray(self.positives_, dtype=np.int64)
        neg = self.sample_negatives()
        X = self.codes_[np.concatenate([pos, neg])]
        y = np.concatenate([np.ones(len(pos), dtype=np.int64), np.zeros(len(neg), dtype=np.int64)])
        self.learners_, self.learner_weights_ = boost(X, y, self.levels_, self.n_rounds, self.alpha)
        return self

    def decision_function(self):
        """Raw ensemble margin for every dataset point."""
        if self.learners_ is None:
            self.fit_ensemble()
        margin = np.zeros(self.dataset_.n)
        for a, nb in zip(self.learner_weights_, self.learners_):
            margin += a * 0.5 * nb.log_odds(self.codes_)
        return margin

    def rank_all(self):
        return self._rank_scores(minmax_rescale(self.decision_function()))

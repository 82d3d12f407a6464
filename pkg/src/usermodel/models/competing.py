"""Competing models: Bayesian model averaging over attribute subsets."""

import math

import numpy as np

from ..core import InteractionModel, minmax_rescale
from ..exceptions import TooManyAttributes

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _logsumexp(a, axis=None):
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis) if axis is not None else float(out.ravel()[0])


def _normal_cdf(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def subset_masks(d):
    """Boolean ``(2**d, d)`` matrix; row ``k`` holds the bits of ``k``."""
    k = np.arange(2**d)[:, None]
    return ((k >> np.arange(d)[None, :]) & 1).astype(bool)


class CompetingModels(InteractionModel):
    """Maintain a posterior over the ``2**d`` attribute-subset exploration models.

    Model ``S`` says the user picks points with probability proportional to
    the product, over attributes in ``S``, of a predictive term learned from
    past interactions: a truncated Gaussian KDE for continuous attributes and
    Laplace-smoothed frequencies for categorical and ordinal ones. The empty
    subset is the uniform null model. Each model's distribution is
    normalized over the dataset points, so models with different subsets are
    comparable. Posteriors are updated prequentially: every interaction is
    scored before it enters the statistics.

    Relevance is the posterior-weighted mixture of the models' predictive
    distributions; bias toward ``a`` is the posterior mass of subsets
    containing ``a``.

    Parameters
    ----------
    bandwidth : float
        KDE bandwidth as a fraction of each continuous attribute's range.
    alpha : float
        Additive smoothing for categorical frequencies.
    d_cap : int
        Largest number of attributes accepted.
    unweighted_bma : bool
        Sum the model predictives without posterior weights.
    """

    predicts = True
    detects_bias = True

    def __init__(self, bandwidth=0.1, alpha=1.0, d_cap=16, unweighted_bma=False):
        self.bandwidth = bandwidth
        self.alpha = alpha
        self.d_cap = d_cap
        self.unweighted_bma = unweighted_bma

    def _prepare(self, dataset):
        if dataset.d > self.d_cap:
            raise TooManyAttributes(f"d={dataset.d} attributes exceeds d_cap={self.d_cap}")
        if self.bandwidth <= 0 or self.alpha <= 0:
            raise ValueError("bandwidth and alpha must be positive")
        self.masks_ = subset_masks(dataset.d)
        X = dataset.values
        self.lo_ = X.min(axis=0)
        self.hi_ = X.max(axis=0)
        self.continuous_ = np.array([a.is_continuous for a in dataset.schema])
        self.levels_ = [0 if a.is_continuous else a.n_categories for a in dataset.schema]
        self.codes_ = [None if a.is_continuous else X[:, j].astype(np.int64) for j, a in enumerate(dataset.schema)]
        n_models = len(self.masks_)
        self._chunk = max(1, min(n_models, 4_000_000 // max(dataset.n, 1)))

    def _reset(self):
        d = self.dataset_.d
        self.log_posterior_ = np.full(len(self.masks_), -d * math.log(2.0))
        self.counts_ = [None if c else np.zeros(m) for c, m in zip(self.continuous_, self.levels_)]
        self.kde_sums_ = [np.zeros(self.dataset_.n) if c else None for c in self.continuous_]
        self.history_ = []

    # -- per-attribute predictive terms ----------------------------------------

    def _kernel_at_points(self, j, v):
        """Truncated Gaussian kernel centred on ``v``, evaluated at every point."""
        lo, hi = self.lo_[j], self.hi_[j]
        if hi <= lo:
            return np.ones(self.dataset_.n)
        h = self.bandwidth * (hi - lo)
        mass = _normal_cdf((hi - v) / h) - _normal_cdf((lo - v) / h)
        z = (self.dataset_.values[:, j] - v) / h
        return np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / (h * mass)

    def attribute_terms(self):
        """``(d, n)`` array of each attribute's predictive term at every point.

        Categorical terms are the smoothed relative frequency of the point's
        level; continuous terms are the KDE density at the point's value.
        Only meaningful after at least one observation.
        """
        t = len(self.history_)
        terms = np.empty((self.dataset_.d, self.dataset_.n))
        for j in range(self.dataset_.d):
            if self.continuous_[j]:
                terms[j] = self.kde_sums_[j] / t
            else:
                m = self.levels_[j]
                terms[j] = ((self.counts_[j] + self.alpha) / (t + self.alpha * m))[self.codes_[j]]
        return terms

    def attribute_term(self, name, point_id):
        j = self.dataset_.attribute_index(name)
        return float(self.attribute_terms()[j, self.dataset_.index[point_id]])

    def _log_predictive_chunks(self):
        """Yield ``(slice, log Pr(x | S))`` over chunks of the model list."""
        n = self.dataset_.n
        if not self.history_:
            for start in range(0, len(self.masks_), self._chunk):
                sl = slice(start, min(start + self._chunk, len(self.masks_)))
                yield sl, np.full((sl.stop - sl.start, n), -math.log(n))
            return
        log_terms = np.log(self.attribute_terms())
        for start in range(0, len(self.masks_), self._chunk):
            sl = slice(start, min(start + self._chunk, len(self.masks_)))
            log_g = self.masks_[sl].astype(float) @ log_terms
            yield sl, log_g - _logsumexp(log_g, axis=1)[:, None]

    def predictive(self, subset, point_id):
        """Pr(point | interactions so far, model over ``subset``)."""
        names = set(subset)
        unknown = names - set(self.dataset_.names)
        if unknown:
            raise KeyError(f"unknown attributes {sorted(unknown)}")
        k = sum(1 << j for j, a in enumerate(self.dataset_.names) if a in names)
        row = self.dataset_.index[point_id]
        for sl, log_pred in self._log_predictive_chunks():
            if sl.start <= k < sl.stop:
                return float(math.exp(log_pred[k - sl.start, row]))
        raise AssertionError("unreachable")

    # -- updates and queries ----------------------------------------------------

    def _observe(self, row, event):
        for sl, log_pred in self._log_predictive_chunks():
            self.log_posterior_[sl] += log_pred[:, row]
        self.log_posterior_ -= _logsumexp(self.log_posterior_)
        x = self.dataset_.values[row]
        for j in range(self.dataset_.d):
            if self.continuous_[j]:
                self.kde_sums_[j] += self._kernel_at_points(j, x[j])
            else:
                self.counts_[j][int(x[j])] += 1
        self.history_.append(row)

    @property
    def posterior_(self):
        return np.exp(self.log_posterior_)

    def posterior(self):
        """Posterior probability keyed by the frozenset of subset attribute names."""
        names = self.dataset_.names
        return {
            frozenset(n for n, bit in zip(names, mask) if bit): float(p)
            for mask, p in zip(self.masks_, self.posterior_)
        }

    def rank_all(self):
        weights = np.ones(len(self.masks_)) if self.unweighted_bma else self.posterior_
        # mix deviations from the uniform 1/n: the weights sum to a constant,
        # so the ordering is unchanged, and near-flat mixtures keep their
        # small differences instead of losing them next to 1/n
        uniform = 1.0 / self.dataset_.n
        score = np.zeros(self.dataset_.n)
        for sl, log_pred in self._log_predictive_chunks():
            score += weights[sl] @ (np.exp(log_pred) - uniform)
        return self._rank_scores(minmax_rescale(score))

    def bias_all(self):
        values = self.posterior_ @ self.masks_.astype(float)
        return self._bias_scores(np.clip(values, 0.0, 1.0))

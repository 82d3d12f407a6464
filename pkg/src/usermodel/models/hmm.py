"""Particle-filter attention model (hidden Markov model over the mark space)."""

import math

import numpy as np

from ..core import InteractionModel, minmax_rescale
from ..exceptions import NoVisualizedAttributes, NotObserved

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def systematic_resample(weights, rng):
    """Indices drawn by systematic resampling: one uniform offset, p strata."""
    p = len(weights)
    positions = (rng.random() + np.arange(p)) / p
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.minimum(np.searchsorted(cumulative, positions, side="right"), p - 1)


def effective_sample_size(weights):
    return 1.0 / float(np.sum(np.square(weights)))


class HiddenMarkovAttention(InteractionModel):
    """Track user attention over the visualized attributes with a particle filter.

    Each particle carries an attention locus (one value per visualized
    attribute) and a bias vector ``pi`` over the same attributes. An
    interaction at ``x`` is emitted with likelihood::

        prod_a  pi_a * k_a(x_a, attention_a) + (1 - pi_a) * u_a

    where ``k_a`` is a Gaussian kernel (continuous) or a smoothed indicator
    (categorical, ordinal) and ``u_a`` the uniform density on the
    attribute. Between interactions continuous attention drifts as a
    Gaussian random walk and categorical attention sticks with probability
    ``stickiness``. ``pi`` is learned by resampling plus roughening.

    Parameters
    ----------
    n_particles : int
    sigma : float
        Random-walk step, as a fraction of each continuous attribute's range.
    stickiness : float
        Probability that categorical attention stays put per step.
    bandwidth : float
        Emission kernel width, as a fraction of the attribute range.
    ess_threshold : float
        Resample when the effective sample size drops below
        ``ess_threshold * n_particles``.
    roughening : float
        Standard deviation of the Gaussian jitter added to ``pi`` after
        resampling.
    category_smoothing : float
        Pseudo-count added to every level of a categorical kernel.
    random_state : int
    """

    predicts = True
    detects_bias = True

    def __init__(
        self,
        n_particles=1000,
        sigma=0.05,
        stickiness=0.95,
        bandwidth=0.05,
        ess_threshold=0.5,
        roughening=0.02,
        category_smoothing=0.01,
        random_state=0,
    ):
        self.n_particles = n_particles
        self.sigma = sigma
        self.stickiness = stickiness
        self.bandwidth = bandwidth
        self.ess_threshold = ess_threshold
        self.roughening = roughening
        self.category_smoothing = category_smoothing
        self.random_state = random_state

    def _prepare(self, dataset):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not 0 < self.stickiness < 1:
            raise ValueError("stickiness must lie in (0, 1)")
        visible = [j for j, a in enumerate(dataset.schema) if a.visualized]
        if not visible:
            raise NoVisualizedAttributes("the HMM needs at least one visualized attribute")
        self.visible_ = np.array(visible)
        X = dataset.values[:, self.visible_]
        self.continuous_ = np.array([dataset.schema[j].is_continuous for j in visible])
        self.lo_ = X.min(axis=0)
        self.hi_ = X.max(axis=0)
        span = self.hi_ - self.lo_
        # a constant continuous column gets unit scale and a flat emission term
        self.range_ = np.where(span > 0, span, 1.0)
        self.constant_ = self.continuous_ & (span <= 0)
        self.levels_ = np.array([0 if c else dataset.schema[j].n_categories for c, j in zip(self.continuous_, visible)])
        self.X_ = X

    def _reset(self):
        rng = np.random.default_rng(self.random_state)
        p = self.n_particles
        self._rng = rng
        self.attention_ = self.X_[rng.integers(self.dataset_.n, size=p)].copy()
        self.pi_ = np.clip(rng.dirichlet(np.ones(len(self.visible_)), size=p), 0.0, 1.0)
        self.weights_ = np.full(p, 1.0 / p)
        self.ess_history_ = []
        self.n_resamples_ = 0

    # -- filter steps ---------------------------------------------------------

    def _transition(self):
        rng = self._rng
        p = self.n_particles
        for a in range(len(self.visible_)):
            if self.continuous_[a]:
                step = rng.normal(0.0, self.sigma * self.range_[a], size=p)
                self.attention_[:, a] = np.clip(self.attention_[:, a] + step, self.lo_[a], self.hi_[a])
            else:
                move = rng.random(p) >= self.stickiness
                self.attention_[move, a] = rng.integers(self.levels_[a], size=int(move.sum()))

    def _channel_terms(self, a, x, attention, pi):
        """Mixture term of channel ``a`` for values ``x`` against every particle.

        ``x`` is 1-D; the result has shape ``(len(attention), len(x))``.
        """
        if self.constant_[a]:
            return np.ones((len(attention), len(x)))
        if self.continuous_[a]:
            h = self.bandwidth * self.range_[a]
            out = np.subtract(x[None, :], attention[:, None])
            out *= 1.0 / h
            np.square(out, out=out)
            out *= -0.5
            np.exp(out, out=out)
            out *= (pi * np.exp(-_LOG_SQRT_2PI) / h)[:, None]
            out += ((1.0 - pi) / self.range_[a])[:, None]
            return out
        m = self.levels_[a]
        s = self.category_smoothing
        # (particles, levels) table of the mixture term, then gathered by level
        hit = np.arange(m)[None, :] == attention[:, None]
        table = pi[:, None] * ((hit + s) / (1.0 + m * s)) + ((1.0 - pi) / m)[:, None]
        return table[:, x.astype(np.int64)]

    def log_likelihood(self, x):
        """Log emission likelihood of one visible-attribute vector per particle."""
        out = np.zeros(self.n_particles)
        for a in range(len(self.visible_)):
            out += np.log(self._channel_terms(a, x[a : a + 1], self.attention_[:, a], self.pi_[:, a])[:, 0])
        return out

    def _observe(self, row, event):
        self._transition()
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights_) + self.log_likelihood(self.X_[row])
        logw -= logw.max()
        w = np.exp(logw)
        self.weights_ = w / w.sum()
        ess = effective_sample_size(self.weights_)
        self.ess_history_.append(ess)
        if ess < self.ess_threshold * self.n_particles:
            self._resample()

    def _resample(self):
        idx = systematic_resample(self.weights_, self._rng)
        self.attention_ = self.attention_[idx]
        pi = self.pi_[idx] + self._rng.normal(0.0, self.roughening, size=self.pi_.shape)
        self.pi_ = np.clip(pi, 0.0, 1.0)
        self.weights_ = np.full(self.n_particles, 1.0 / self.n_particles)
        self.n_resamples_ += 1

    # -- queries --------------------------------------------------------------

    def _require_observation(self):
        if self.n_observed_ == 0:
            raise NotObserved("the HMM needs at least one observation")

    def predictive(self, chunk_size=2048):
        """Mixture likelihood ``sum_i w_i L(x | particle_i)`` for every point."""
        out = np.empty(self.dataset_.n)
        for start in range(0, self.dataset_.n, chunk_size):
            X = self.X_[start : start + chunk_size]
            L = np.ones((self.n_particles, len(X)))
            for a in range(len(self.visible_)):
                L *= self._channel_terms(a, X[:, a], self.attention_[:, a], self.pi_[:, a])
            out[start : start + len(X)] = self.weights_ @ L
        return out

    def rank_all(self):
        self._require_observation()
        return self._rank_scores(minmax_rescale(self.predictive()))

    def bias_all(self):
        self._require_observation()
        values = np.zeros(self.dataset_.d)
        values[self.visible_] = np.clip(self.weights_ @ self.pi_, 0.0, 1.0)
        return self._bias_scores(values)

import numpy as np

from ..core import InteractionModel


class UniformRelevance(InteractionModel):
    """Control model: every point scores 0.5, so ranking falls back to id order."""

    predicts = True

    def _observe(self, row, event):
        pass

    def rank_all(self):
        return self._rank_scores(np.full(self.dataset_.n, 0.5))


class RandomRelevance(InteractionModel):
    """Control model drawing fresh uniform scores at every query.

    Scores are seeded by ``(random_state, number of observations)`` so a
    replay is reproducible and independent of how often it is queried.
    """

    predicts = True

    def __init__(self, random_state=0):
        self.random_state = random_state

    def _observe(self, row, event):
        pass

    def rank_all(self):
        rng = np.random.default_rng([int(self.random_state), self.n_observed_])
        return self._rank_scores(rng.random(self.dataset_.n))

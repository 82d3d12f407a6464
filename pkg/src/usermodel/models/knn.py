"""k-nearest-neighbors relevance model."""

import numpy as np

from ..core import InteractionModel
from ..preprocess import build_neighbor_matrix


class KNNRelevance(InteractionModel):
    """Relevance as the smoothed share of interacted points among a point's
    ``k`` nearest neighbors (Gower distance).

    Every observed point is labelled positive and everything else negative;
    the score of ``x`` is ``(pos_k(x) + alpha) / (k + 2 * alpha)``.

    Parameters
    ----------
    k : int
        Neighborhood size, must be smaller than the dataset size.
    alpha : float
        Additive smoothing on the positive count.
    """

    predicts = True

    def __init__(self, k=20, alpha=1.0):
        self.k = k
        self.alpha = alpha

    def _prepare(self, dataset):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        self.neighbors_ = build_neighbor_matrix(dataset, self.k)

    def fit(self, dataset, y=None, neighbors=None):
        """Fit on ``dataset``; a precomputed ``NeighborMatrix`` may be reused."""
        if neighbors is not None and neighbors.k == self.k and neighbors.point_ids == dataset.point_ids:
            self.dataset_ = dataset
            self.neighbors_ = neighbors
            return self.reset()
        return super().fit(dataset)

    def _reset(self):
        self.labels_ = np.zeros(self.dataset_.n, dtype=np.int8)

    def _observe(self, row, event):
        self.labels_[row] = 1

    def rank_all(self):
        pos = self.labels_[self.neighbors_.indices].sum(axis=1)
        return self._rank_scores((pos + self.alpha) / (self.k + 2.0 * self.alpha))

"""Distribution-comparison bias detectors."""

import numpy as np

from ..core import InteractionModel
from ..exceptions import EmptyHistory, MissingBinning
from ..preprocess import DEFAULT_BIN_COUNT, BinningSpec, default_bins
from ..stats import chi_square_gof, hellinger_distance, ks_two_sample


def _history_rows(dataset, history):
    rows = np.asarray([dataset.index[h] if isinstance(h, str) else h for h in history], dtype=np.int64)
    if rows.size == 0:
        raise EmptyHistory("bias metrics need at least one interacted point")
    return rows


def attribute_distribution_test(dataset, history, attribute):
    """Compare the interacted values of ``attribute`` with the whole dataset.

    Categorical and ordinal attributes use a chi-square goodness-of-fit test
    against the dataset proportions; continuous attributes a two-sample
    Kolmogorov-Smirnov test. ``history`` holds point ids or row indices and
    may repeat points.
    """
    rows = _history_rows(dataset, history)
    attr = dataset.attribute(attribute)
    col = dataset.column(attribute)
    if attr.is_continuous:
        return ks_two_sample(col[rows], col)
    codes = col.astype(np.int64)
    m = attr.n_categories
    observed = np.bincount(codes[rows], minlength=m)
    proportions = np.bincount(codes, minlength=m) / dataset.n
    return chi_square_gof(observed, proportions)


def attribute_distribution_bias(dataset, history, attribute):
    return 1.0 - attribute_distribution_test(dataset, history, attribute).p_value


def level_distributions(dataset, history, attribute, bins=None):
    """Level proportions of ``attribute`` over the dataset and over ``history``."""
    rows = _history_rows(dataset, history)
    attr = dataset.attribute(attribute)
    col = dataset.column(attribute)
    if attr.is_continuous:
        spec = bins
        if not isinstance(bins, BinningSpec):
            spec = {b.attribute: b for b in (bins or ())}.get(attribute)
        if spec is None:
            if col.min() == col.max():
                return np.ones(1), np.ones(1)
            raise MissingBinning(f"no binning for continuous attribute {attribute!r}")
        codes = spec.assign(col)
        m = spec.bin_count
    else:
        codes = col.astype(np.int64)
        m = attr.n_categories
    p = np.bincount(codes, minlength=m) / dataset.n
    q = np.bincount(codes[rows], minlength=m) / len(rows)
    return p, q


def hellinger_bias(dataset, history, attribute, bins=None):
    p, q = level_distributions(dataset, history, attribute, bins)
    return hellinger_distance(p, q)


class AttributeDistribution(InteractionModel):
    """Bias as one minus the goodness-of-fit p-value of each attribute.

    After each query ``tests_`` holds the per-attribute test results and
    ``assumption_ok_`` is False when any chi-square test had too few
    expected counts.
    """

    detects_bias = True

    def _reset(self):
        self.history_ = []
        self.tests_ = {}

    def _observe(self, row, event):
        self.history_.append(row)

    def bias_all(self):
        names = self.dataset_.names
        self.tests_ = {a: attribute_distribution_test(self.dataset_, self.history_, a) for a in names}
        return self._bias_scores([1.0 - self.tests_[a].p_value for a in names])

    @property
    def assumption_ok_(self):
        if not self.tests_ and self.history_:
            self.bias_all()
        return all(r.assumption_ok for r in self.tests_.values())


class AdaptiveContextualization(InteractionModel):
    """Bias as the Hellinger distance between dataset and interaction
    distributions of each attribute (continuous attributes binned)."""

    detects_bias = True

    def __init__(self, n_bins=DEFAULT_BIN_COUNT):
        self.n_bins = n_bins

    def _prepare(self, dataset):
        self.bins_ = default_bins(dataset, self.n_bins)

    def _reset(self):
        self.history_ = []

    def _observe(self, row, event):
        self.history_.append(row)

    def bias_all(self):
        return self._bias_scores(
            [hellinger_bias(self.dataset_, self.history_, a, self.bins_) for a in self.dataset_.names]
        )

"""Averaging ensemble over relevance models and bias detectors."""

import numpy as np
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ..core import InteractionModel
from ..exceptions import ConfigError, MemberError, MemberNotReady

DEFAULT_RANK_MEMBERS = ("knn", "bnb", "af", "hmm", "cm")
DEFAULT_BIAS_MEMBERS = ("hmm", "cm", "ad", "ac")


def default_members(random_state=0):
    from . import (
        AdaptiveContextualization,
        AnalyticFocus,
        AttributeDistribution,
        BoostedNaiveBayes,
        CompetingModels,
        HiddenMarkovAttention,
        KNNRelevance,
    )

    return [
        ("knn", KNNRelevance()),
        ("bnb", BoostedNaiveBayes(random_state=random_state)),
        ("af", AnalyticFocus()),
        ("hmm", HiddenMarkovAttention(random_state=random_state)),
        ("cm", CompetingModels()),
        ("ad", AttributeDistribution()),
        ("ac", AdaptiveContextualization()),
    ]


class Ensemble(InteractionModel):
    """Unweighted mean of member relevance scores and of member bias scores.

    Parameters
    ----------
    members : list of (name, model), optional
        Every member sees every event once, in list order. Defaults to the
        seven standard models.
    rank_members, bias_members : sequence of str, optional
        Names averaged by ``rank_all`` / ``bias_all``. Default to every member
        able to do the job.
    """

    predicts = True
    detects_bias = True

    def __init__(self, members=None, rank_members=None, bias_members=None):
        if members is not None and len(members) == 0:
            raise ConfigError("an ensemble needs at least one member")
        self.members = members
        self.rank_members = rank_members
        self.bias_members = bias_members

    def _prepare(self, dataset):
        members = default_members() if self.members is None else [(n, clone(m)) for n, m in self.members]
        names = [n for n, _ in members]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate ensemble member names: {names}")
        self.members_ = dict(members)
        if self.members is None and self.rank_members is None:
            rank = list(DEFAULT_RANK_MEMBERS)
        else:
            rank = [n for n, m in members if m.predicts] if self.rank_members is None else list(self.rank_members)
        if self.members is None and self.bias_members is None:
            bias = list(DEFAULT_BIAS_MEMBERS)
        else:
            bias = [n for n, m in members if m.detects_bias] if self.bias_members is None else list(self.bias_members)
        for role, chosen, flag in (("rank", rank, "predicts"), ("bias", bias, "detects_bias")):
            for n in chosen:
                if n not in self.members_:
                    raise ConfigError(f"{role} member {n!r} is not an ensemble member")
                if not getattr(self.members_[n], flag):
                    raise ConfigError(f"member {n!r} cannot serve as a {role} member")
        self.rank_members_ = rank
        self.bias_members_ = bias
        for name, m in self.members_.items():
            try:
                m.fit(dataset)
            except Exception as exc:
                raise MemberError(name, exc) from exc

    def _reset(self):
        for m in self.members_.values():
            m.reset()

    def _observe(self, row, event):
        for name, m in self.members_.items():
            try:
                m.observe(event)
            except Exception as exc:
                raise MemberError(name, exc) from exc

    def _mean(self, names, query):
        if not names:
            raise ConfigError(f"no members configured for {query}")
        total = None
        for name in names:
            try:
                values = getattr(self.members_[name], query)().values
            except NotFittedError as exc:
                raise MemberNotReady(f"member {name!r} not ready: {exc}") from exc
            total = values.copy() if total is None else total + values
        return total / len(names)

    def rank_all(self):
        return self._rank_scores(self._mean(self.rank_members_, "rank_all"))

    def bias_all(self):
        return self._bias_scores(np.clip(self._mean(self.bias_members_, "bias_all"), 0.0, 1.0))

    @property
    def assumption_ok_(self):
        flags = [getattr(m, "assumption_ok_") for n, m in self.members_.items() if n in self.bias_members_ and hasattr(type(m), "assumption_ok_")]
        return all(flags) if flags else None

"""Model registry and dotted-key configuration."""

import json

from .exceptions import ConfigError
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
from .models.ensemble import DEFAULT_BIAS_MEMBERS, DEFAULT_RANK_MEMBERS

MODEL_NAMES = ("knn", "bnb", "af", "hmm", "cm", "ad", "ac", "ens")
PREDICTORS = ("knn", "bnb", "af", "hmm", "cm", "ens")
BIAS_DETECTORS = ("hmm", "cm", "ad", "ac", "ens")

_CLASSES = {
    "knn": KNNRelevance,
    "bnb": BoostedNaiveBayes,
    "af": AnalyticFocus,
    "hmm": HiddenMarkovAttention,
    "cm": CompetingModels,
    "ad": AttributeDistribution,
    "ac": AdaptiveContextualization,
}

# config key -> constructor parameter
_PARAMS = {
    "knn": {"k": "k", "alpha": "alpha"},
    "bnb": {"rounds": "n_rounds", "negative_ratio": "negative_ratio", "alpha": "alpha", "seed": "random_state", "bins": "n_bins"},
    "af": {"initial": "initial", "persistence": "persistence", "epsilon": "epsilon", "bins": "n_bins"},
    "hmm": {
        "particles": "n_particles",
        "sigma": "sigma",
        "stickiness": "stickiness",
        "bandwidth": "bandwidth",
        "ess_threshold": "ess_threshold",
        "roughening": "roughening",
        "category_smoothing": "category_smoothing",
        "seed": "random_state",
    },
    "cm": {"bandwidth": "bandwidth", "alpha": "alpha", "d_cap": "d_cap", "unweighted_bma": "unweighted_bma"},
    "ad": {},
    "ac": {"bins": "n_bins"},
}

_SEEDED = {"bnb", "hmm"}


def flatten(raw, prefix=""):
    """Nested config objects to dotted keys; dotted keys pass through."""
    out = {}
    for key, value in raw.items():
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, full + "."))
        else:
            out[full] = value
    return out


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return flatten(raw)


def _split_names(value):
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


def model_params(name, config, seed=0):
    """Constructor keyword arguments for model ``name`` from dotted ``config``."""
    if name not in _CLASSES:
        raise ConfigError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    params = {"random_state": seed} if name in _SEEDED else {}
    mapping = _PARAMS[name]
    actions = {}
    for key, value in config.items():
        ns, _, rest = key.partition(".")
        if ns != name:
            continue
        if name == "af" and rest.startswith("actions."):
            parts = rest.split(".")
            if len(parts) != 3 or parts[2] not in ("initial", "persistence"):
                raise ConfigError(f"bad key {key!r}; expected af.actions.<token>.initial|persistence")
            actions.setdefault(parts[1], {})[parts[2]] = float(value)
            continue
        if rest not in mapping:
            raise ConfigError(f"unknown config key {key!r}")
        params[mapping[rest]] = value
    if actions:
        params["actions"] = actions
    return params


def build_model(name, config=None, seed=0):
    config = config or {}
    if name == "ens":
        rank = _split_names(config.get("ensemble.members", DEFAULT_RANK_MEMBERS))
        bias = _split_names(config.get("ensemble.bias_members", DEFAULT_BIAS_MEMBERS))
        names = list(dict.fromkeys(rank + bias))
        if not names:
            raise ConfigError("ensemble needs at least one member")
        members = [(n, build_model(n, config, seed)) for n in names]
        return Ensemble(members, rank_members=rank, bias_members=bias)
    try:
        return _CLASSES[name](**model_params(name, config, seed))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from None


def validate_config_keys(config):
    """Raise on keys outside every known namespace."""
    for key in config:
        ns = key.partition(".")[0]
        if ns == "ensemble":
            if key not in ("ensemble.members", "ensemble.bias_members"):
                raise ConfigError(f"unknown config key {key!r}")
        elif ns in _CLASSES:
            model_params(ns, {key: config[key]})
        else:
            raise ConfigError(f"unknown config namespace in {key!r}")

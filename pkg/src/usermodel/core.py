"""Domain types, validation and the shared model contract."""

import csv
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    DuplicateId,
    MissingColumn,
    NonFiniteValue,
    NonMonotonicTime,
    SchemaError,
    UnknownCategory,
    UnknownPoint,
    ValidationError,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
ORDINAL = "ordinal"
KINDS = (CONTINUOUS, CATEGORICAL, ORDINAL)


@dataclass(frozen=True)
class AttributeSchema:
    """One attribute of the visualized dataset.

    ``categories`` is the ordered token list for categorical and ordinal
    attributes (order matters for ordinal ones) and must be empty for
    continuous attributes.
    """

    name: str
    kind: str
    categories: tuple = ()
    visualized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        if not self.name:
            raise SchemaError("attribute name must be non-empty")
        if self.kind not in KINDS:
            raise SchemaError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CONTINUOUS:
            if self.categories:
                raise SchemaError(f"continuous attribute {self.name!r} cannot declare categories")
        else:
            if not self.categories:
                raise SchemaError(f"attribute {self.name!r}: categories required for kind {self.kind!r}")
            if len(set(self.categories)) != len(self.categories):
                raise SchemaError(f"attribute {self.name!r}: duplicate categories")

    @property
    def is_continuous(self):
        return self.kind == CONTINUOUS

    @property
    def n_categories(self):
        return len(self.categories)

    def to_dict(self):
        out = {"name": self.name, "kind": self.kind, "visualized": self.visualized}
        if self.categories:
            out["categories"] = list(self.categories)
        return out

    @classmethod
    def from_dict(cls, raw):
        try:
            return cls(
                name=raw["name"],
                kind=raw["kind"],
                categories=tuple(raw.get("categories") or ()),
                visualized=bool(raw.get("visualized", True)),
            )
        except KeyError as exc:
            raise SchemaError(f"schema entry {raw!r} missing key {exc}") from None


def _check_schema(schema):
    schema = tuple(schema)
    if not schema:
        raise SchemaError("schema must declare at least one attribute")
    names = [a.name for a in schema]
    if len(set(names)) != len(names):
        raise SchemaError(f"attribute names must be unique, got {names}")
    if "point_id" in names:
        raise SchemaError("'point_id' is reserved and cannot be an attribute name")
    return schema


class Dataset:
    """The point set shown to the user.

    Values are held in an ``(n, d)`` float array; categorical and ordinal
    columns store the integer position of the token in
    ``AttributeSchema.categories``.
    """

    def __init__(self, schema, point_ids, values):
        self.schema = _check_schema(schema)
        self.point_ids = tuple(str(p) for p in point_ids)
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape != (len(self.point_ids), len(self.schema)):
            raise ValidationError(
                f"values must have shape (n, d)=({len(self.point_ids)}, {len(self.schema)}), "
                f"got {values.shape}"
            )
        if not self.point_ids:
            raise ValidationError("dataset must contain at least one point")
        self.index = {}
        for i, pid in enumerate(self.point_ids):
            if pid in self.index:
                raise DuplicateId(f"duplicate point_id {pid!r} at row {i}")
            self.index[pid] = i
        for j, attr in enumerate(self.schema):
            col = values[:, j]
            bad = ~np.isfinite(col)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise NonFiniteValue(f"row {i} ({self.point_ids[i]!r}), column {attr.name!r}: non-finite value")
            if not attr.is_continuous:
                codes = col.astype(int)
                if (codes != col).any() or codes.min() < 0 or codes.max() >= attr.n_categories:
                    raise UnknownCategory(f"column {attr.name!r}: category code out of range")
        values.setflags(write=False)
        self.values = values
        # lexical rank of each id, used for deterministic tie-breaking
        order = sorted(range(len(self.point_ids)), key=self.point_ids.__getitem__)
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        self.id_rank = rank

    @property
    def n(self):
        return len(self.point_ids)

    @property
    def d(self):
        return len(self.schema)

    @property
    def names(self):
        return tuple(a.name for a in self.schema)

    def attribute_index(self, name):
        for j, attr in enumerate(self.schema):
            if attr.name == name:
                return j
        raise KeyError(name)

    def attribute(self, name):
        return self.schema[self.attribute_index(name)]

    def column(self, name):
        return self.values[:, self.attribute_index(name)]

    def codes(self, name):
        return self.column(name).astype(np.int64)

    def record(self, point_id):
        """Decoded attribute values of one point, keyed by attribute name."""
        row = self.values[self.index[point_id]]
        return {
            a.name: float(v) if a.is_continuous else a.categories[int(v)]
            for a, v in zip(self.schema, row)
        }

    def rows(self, point_ids):
        return np.fromiter((self.index[p] for p in point_ids), dtype=np.int64)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.d}, attributes={list(self.names)})"


@dataclass(frozen=True)
class InteractionEvent:
    point_id: str
    t: int
    action: str = "click"


@dataclass(frozen=True)
class Session:
    session_id: str
    events: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def point_ids(self):
        return [e.point_id for e in self.events]


class _ScoreMap(Mapping):
    """Read-only mapping backed by an aligned array of scores."""

    def __init__(self, keys, values, key_rank=None, positions=None):
        self._keys = tuple(keys)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (len(self._keys),):
            raise ValidationError("one score per key required")
        self._pos = positions
        self.key_rank = key_rank

    def _positions(self):
        if self._pos is None:
            self._pos = {k: i for i, k in enumerate(self._keys)}
        return self._pos

    def __getitem__(self, key):
        return float(self.values[self._positions()[key]])

    def __iter__(self):
        return iter(self._keys)

    def __len__(self):
        return len(self._keys)

    def keys_tuple(self):
        return self._keys

    def to_dict(self):
        return {k: float(v) for k, v in zip(self._keys, self.values)}

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()!r})"


class RankScores(_ScoreMap):
    """Relevance of every dataset point, each in [0, 1]."""


class BiasScores(_ScoreMap):
    """Bias toward every attribute, each in [0, 1]."""


def _key_rank(scores):
    if scores.key_rank is not None:
        return scores.key_rank
    keys = scores.keys_tuple()
    order = sorted(range(len(keys)), key=keys.__getitem__)
    rank = np.empty(len(keys), dtype=np.int64)
    rank[order] = np.arange(len(keys))
    return rank


def to_ordering(scores):
    """Keys sorted by descending score, ties broken by ascending key."""
    keys = scores.keys_tuple()
    order = np.lexsort((_key_rank(scores), -scores.values))
    return [keys[i] for i in order]


def rank_of(scores, key):
    """1-based position of ``key`` in ``to_ordering(scores)``, in O(n)."""
    i = scores._positions()[key]
    v = scores.values[i]
    ranks = _key_rank(scores)
    ahead = np.count_nonzero(scores.values > v)
    ahead += np.count_nonzero((scores.values == v) & (ranks < ranks[i]))
    return int(ahead) + 1


def top_key(scores):
    """First key of ``to_ordering`` without a full sort."""
    vmax = scores.values.max()
    ranks = _key_rank(scores)
    cand = np.flatnonzero(scores.values == vmax)
    return scores.keys_tuple()[int(cand[np.argmin(ranks[cand])])]


def minmax_rescale(values):
    """Map raw beliefs onto [0, 1]; a constant vector maps to 0.5."""
    values = np.asarray(values, dtype=float)
    lo = values.min()
    hi = values.max()
    if not hi > lo:
        return np.full(values.shape, 0.5)
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0)


# -- validation ---------------------------------------------------------------


def _rows(raw):
    if hasattr(raw, "to_dict") and hasattr(raw, "columns"):
        return raw.to_dict(orient="records")
    return list(raw)


def dataset_errors(raw, schema):
    """Every violation found in ``raw`` (rows as mappings), in row order."""
    schema = _check_schema(schema)
    rows = _rows(raw)
    errors = []
    if not rows:
        return [ValidationError("dataset must contain at least one row")]
    present = set(rows[0].keys())
    for col in ("point_id",) + tuple(a.name for a in schema):
        if col not in present:
            errors.append(MissingColumn(f"missing column {col!r}"))
    if errors:
        return errors
    seen = {}
    for i, row in enumerate(rows):
        pid = str(row["point_id"]).strip()
        if not pid:
            errors.append(ValidationError(f"row {i}: empty point_id"))
        elif pid in seen:
            errors.append(DuplicateId(f"row {i}: duplicate point_id {pid!r} (first at row {seen[pid]})"))
        else:
            seen[pid] = i
        for attr in schema:
            value = row[attr.name]
            if attr.is_continuous:
                try:
                    x = float(value)
                except (TypeError, ValueError):
                    x = math.nan
                if not math.isfinite(x):
                    errors.append(NonFiniteValue(f"row {i} ({pid!r}), column {attr.name!r}: {value!r} is not a finite number"))
            elif str(value) not in attr.categories:
                errors.append(UnknownCategory(f"row {i} ({pid!r}), column {attr.name!r}: unknown category {value!r}"))
    return errors


def validate_dataset(raw, schema):
    """Build a :class:`Dataset` from parsed rows, raising on the first violation."""
    schema = _check_schema(schema)
    errors = dataset_errors(raw, schema)
    if errors:
        raise errors[0]
    rows = _rows(raw)
    values = np.empty((len(rows), len(schema)))
    lookup = [{c: k for k, c in enumerate(a.categories)} for a in schema]
    for i, row in enumerate(rows):
        for j, attr in enumerate(schema):
            v = row[attr.name]
            values[i, j] = float(v) if attr.is_continuous else lookup[j][str(v)]
    return Dataset(schema, [str(r["point_id"]).strip() for r in rows], values)


def _event_from(raw):
    if isinstance(raw, InteractionEvent):
        return raw
    try:
        t = int(raw["t"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError(f"event {raw!r}: missing or non-integer t") from None
    return InteractionEvent(str(raw["point_id"]).strip(), t, str(raw.get("action") or "click"))


def session_errors(raw, dataset):
    errors = []
    events = []
    for i, r in enumerate(_rows(raw)):
        try:
            events.append(_event_from(r))
        except ValidationError as exc:
            errors.append(ValidationError(f"row {i}: {exc}"))
    if not events and not errors:
        errors.append(ValidationError("session must contain at least one event"))
    events.sort(key=lambda e: e.t)
    prev = None
    for e in events:
        if e.point_id not in dataset.index:
            errors.append(UnknownPoint(f"t={e.t}: unknown point_id {e.point_id!r}"))
        if e.t < 1:
            errors.append(NonMonotonicTime(f"t={e.t}: time steps start at 1"))
        if prev is not None and e.t <= prev:
            errors.append(NonMonotonicTime(f"t={e.t} repeats or precedes t={prev}"))
        prev = e.t
    return errors, events


def validate_session(raw, dataset, session_id=None):
    """Sort raw events by ``t`` and check them against ``dataset``."""
    rows = _rows(raw)
    errors, events = session_errors(rows, dataset)
    if errors:
        raise errors[0]
    if session_id is None:
        ids = {str(r["session_id"]) for r in rows if not isinstance(r, InteractionEvent) and "session_id" in r}
        if len(ids) > 1:
            raise ValidationError(f"rows mix several session ids: {sorted(ids)}")
        session_id = ids.pop() if ids else "session"
    return Session(str(session_id), tuple(events))


# -- file formats ---------------------------------------------------------------


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def load_schema(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "attributes" not in raw:
        raise SchemaError(f"{path}: expected an object with an 'attributes' list")
    return _check_schema(AttributeSchema.from_dict(a) for a in raw["attributes"])


def save_schema(schema, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"attributes": [a.to_dict() for a in schema]}, fh, indent=2)
        fh.write("\n")


def load_dataset(path, schema):
    rows = read_csv(path)
    if rows and next(iter(rows[0])) != "point_id":
        raise MissingColumn(f"{path}: first column must be 'point_id'")
    return validate_dataset(rows, schema)


def save_dataset(dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("point_id",) + dataset.names)
        for pid in dataset.point_ids:
            rec = dataset.record(pid)
            writer.writerow([pid] + [repr(v) if isinstance(v, float) else v for v in rec.values()])


def group_session_rows(rows):
    """Split session-file rows by ``session_id``, sorted by id."""
    groups = {}
    for i, row in enumerate(rows):
        if "session_id" not in row:
            raise MissingColumn(f"row {i}: missing column 'session_id'")
        groups.setdefault(str(row["session_id"]), []).append(row)
    return dict(sorted(groups.items()))


def load_sessions(path, dataset):
    rows = read_csv(path)
    return [validate_session(g, dataset, sid) for sid, g in group_session_rows(rows).items()]


def save_sessions(sessions, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("session_id", "t", "point_id", "action"))
        for s in sessions:
            for e in s.events:
                writer.writerow((s.session_id, e.t, e.point_id, e.action))


# -- model contract -------------------------------------------------------------


class InteractionModel(BaseEstimator):
    """Base class for every user model.

    Constructor arguments are hyperparameters only. ``fit(dataset)`` does the
    dataset-dependent precomputation and resets the observation state;
    ``reset()`` clears observations but keeps the precomputation, so one
    fitted model can be copied and replayed over many sessions. ``observe``
    is the only method that mutates state after fitting.
    """

    predicts = False
    detects_bias = False

    def fit(self, dataset, y=None):
        if not isinstance(dataset, Dataset):
            raise TypeError(f"expected a Dataset, got {type(dataset).__name__}")
        self.dataset_ = dataset
        self._prepare(dataset)
        self.reset()
        return self

    def _prepare(self, dataset):
        pass

    def reset(self):
        check_is_fitted(self, "dataset_")
        self.n_observed_ = 0
        self.last_t_ = 0
        self._reset()
        return self

    def _reset(self):
        pass

    def observe(self, event):
        check_is_fitted(self, "dataset_")
        try:
            row = self.dataset_.index[event.point_id]
        except KeyError:
            raise UnknownPoint(f"unknown point_id {event.point_id!r}") from None
        self._observe(row, event)
        self.n_observed_ += 1
        self.last_t_ = max(self.last_t_, event.t)
        return self

    def _observe(self, row, event):
        raise NotImplementedError

    def partial_fit(self, events):
        for e in events:
            self.observe(e)
        return self

    def rank_all(self):
        raise TypeError(f"{type(self).__name__} does not predict data interactions")

    def bias_all(self):
        raise TypeError(f"{type(self).__name__} does not detect exploration bias")

    def _rank_scores(self, values):
        ds = self.dataset_
        return RankScores(ds.point_ids, values, ds.id_rank, ds.index)

    def _bias_scores(self, values):
        return BiasScores(self.dataset_.names, values)


def fitted_for(model, dataset):
    """True when ``model`` already holds the precomputation for ``dataset``."""
    return getattr(model, "dataset_", None) is dataset

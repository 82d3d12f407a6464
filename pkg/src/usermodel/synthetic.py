"""Synthetic datasets and biased sessions with planted ground truth."""

import json
from dataclasses import dataclass, field

import numpy as np

from .core import AttributeSchema, Dataset, InteractionEvent, Session
from .exceptions import EmptyFocus, ValidationError

_MAX_REDRAWS = 1000


def gen_dataset(n, schema, seed=0):
    """Continuous attributes uniform on [0, 1]; categorical and ordinal
    attributes uniform over their declared categories."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    schema = tuple(schema)
    rng = np.random.default_rng(seed)
    values = np.empty((n, len(schema)))
    for j, attr in enumerate(schema):
        if attr.is_continuous:
            values[:, j] = rng.random(n)
        else:
            values[:, j] = rng.integers(attr.n_categories, size=n)
    width = len(str(n - 1))
    return Dataset(schema, [f"p{i:0{width}d}" for i in range(n)], values)


@dataclass(frozen=True)
class TaskSpec:
    """A stationary biased exploration task.

    ``focus`` maps each biased attribute to a category token or to a closed
    ``(low, high)`` interval for continuous attributes; the focus subset is
    the set of points satisfying every entry.
    """

    focus: dict
    eta: float = 0.1
    length: int = 20
    n_sessions: int = 30
    seed: int = 0
    action: str = "click"
    biased_attributes: tuple = field(default=())

    def __post_init__(self):
        if not self.biased_attributes:
            object.__setattr__(self, "biased_attributes", tuple(self.focus))
        if set(self.biased_attributes) != set(self.focus):
            raise ValidationError("biased_attributes must match the focus keys")
        if not 0 <= self.eta < 1:
            raise ValidationError(f"eta={self.eta} must lie in [0, 1)")
        if self.length < 1 or self.n_sessions < 1:
            raise ValidationError("length and n_sessions must be >= 1")

    def ground_truth(self):
        focus = {k: list(v) if isinstance(v, (tuple, list)) else v for k, v in self.focus.items()}
        return {"biased_attributes": list(self.biased_attributes), "focus": focus, "eta": self.eta}


def focus_rows(dataset, focus):
    mask = np.ones(dataset.n, dtype=bool)
    for name, target in focus.items():
        try:
            attr = dataset.attribute(name)
        except KeyError:
            raise ValidationError(f"focus attribute {name!r} not in dataset") from None
        col = dataset.column(name)
        if attr.is_continuous:
            lo, hi = target
            mask &= (col >= lo) & (col <= hi)
        else:
            if target not in attr.categories:
                raise ValidationError(f"focus category {target!r} not declared for {name!r}")
            mask &= col == attr.categories.index(target)
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        raise EmptyFocus(f"no point matches focus {focus!r}")
    return rows


def gen_sessions(dataset, task):
    """Sessions whose events hit the focus subset with probability ``1 - eta``
    and a uniform dataset point otherwise, never repeating the previous point."""
    focus = focus_rows(dataset, task.focus)
    if dataset.n < 2 and task.length > 1:
        raise ValidationError("cannot avoid immediate repeats with a single point")
    rng = np.random.default_rng(task.seed)
    width = len(str(task.n_sessions - 1))
    sessions = []
    for s in range(task.n_sessions):
        events = []
        prev = -1
        for t in range(1, task.length + 1):
            for _ in range(_MAX_REDRAWS):
                pool = dataset.n if rng.random() < task.eta else None
                row = int(rng.integers(pool)) if pool is not None else int(focus[rng.integers(focus.size)])
                if row != prev:
                    break
            else:
                raise ValidationError("focus subset too small to avoid immediate repeats")
            events.append(InteractionEvent(dataset.point_ids[row], t, task.action))
            prev = row
        sessions.append(Session(f"s{s:0{width}d}", tuple(events)))
    return sessions


def save_ground_truth(task, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(task.ground_truth(), fh, indent=2)
        fh.write("\n")


def standard_schema(n_types=8, n_shifts=3):
    """Two continuous map coordinates plus two categorical attributes."""
    return (
        AttributeSchema("x", "continuous"),
        AttributeSchema("y", "continuous"),
        AttributeSchema("type", "categorical", tuple(f"type{k}" for k in range(n_types))),
        AttributeSchema("shift", "categorical", tuple(f"shift{k}" for k in range(n_shifts))),
    )

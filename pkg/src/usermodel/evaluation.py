"""Session replay, success@k metrics and bias timelines."""

import copy
import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import BiasScores, fitted_for, rank_of, top_key
from .exceptions import EmptyRecords, ReplayError, UnknownAttribute, ValidationError

KAPPAS = (1, 5, 10, 20, 50, 100)


@dataclass(frozen=True)
class PredictionRecord:
    session_id: str
    t: int
    model: str
    rank: int
    success: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "session_id": self.session_id,
            "t": self.t,
            "model": self.model,
            "rank": self.rank,
            "success": {str(k): v for k, v in self.success.items()},
        }


@dataclass(frozen=True)
class BiasTimelineRecord:
    session_id: str
    t: int
    model: str
    top: str
    confidence: float
    assumption_ok: object = None
    scores: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "session_id": self.session_id,
            "t": self.t,
            "model": self.model,
            "top": self.top,
            "confidence": self.confidence,
            "assumption_ok": self.assumption_ok,
            "scores": self.scores,
        }


def prepare(model, dataset):
    """Fit ``model`` on ``dataset`` or, if already fitted on it, reset it."""
    if fitted_for(model, dataset):
        return model.reset()
    return model.fit(dataset)


def _model_name(model, name):
    return name if name is not None else type(model).__name__


def replay(dataset, session, model, kappas=KAPPAS, model_name=None):
    """Score every interaction after the first against the model's ranking.

    The rank of event ``t`` is read from the model's scores after it has
    observed events ``1..t-1`` only; event ``t`` is observed afterwards.
    """
    if len(session) < 2:
        raise ValidationError(f"session {session.session_id!r} needs at least 2 events to score")
    name = _model_name(model, model_name)
    kappas = tuple(sorted(kappas))
    prepare(model, dataset)
    events = session.events
    records = []
    t = events[0].t
    try:
        model.observe(events[0])
        for event in events[1:]:
            t = event.t
            r = rank_of(model.rank_all(), event.point_id)
            records.append(
                PredictionRecord(session.session_id, t, name, r, {k: int(r <= k) for k in kappas})
            )
            model.observe(event)
    except Exception as exc:
        raise ReplayError(session.session_id, t, exc) from exc
    return records


def success_rate(records, kappa):
    """Pooled success: total successes over total predictions."""
    if not records:
        raise EmptyRecords("no prediction records")
    return sum(r.success[kappa] for r in records) / len(records)


def mean_rank(records):
    if not records:
        raise EmptyRecords("no prediction records")
    return sum(r.rank for r in records) / len(records)


def parse_groups(spec):
    """Parse ``"location=lon+lat,type,mixed=lon+lat+type"`` into a dict.

    An entry without ``=`` is a singleton group named after its attribute.
    """
    groups = {}
    for entry in filter(None, (e.strip() for e in spec.split(","))):
        name, _, members = entry.partition("=")
        members = members or name
        groups[name.strip()] = tuple(m.strip() for m in members.split("+") if m.strip())
    return groups


def combine_bias(scores, groups):
    """Bias of each group as the product of its members' bias values."""
    values = []
    for name, members in groups.items():
        members = (members,) if isinstance(members, str) else tuple(members)
        v = 1.0
        for m in members:
            if m not in scores:
                raise UnknownAttribute(f"group {name!r}: unknown attribute {m!r}")
            v *= scores[m]
        values.append(v)
    return BiasScores(list(groups), values)


def _confidence(scores):
    total = float(scores.values.sum())
    return float(scores.values.max()) / total if total > 0 else 0.0


def bias_timeline(dataset, session, model, groups=None, model_name=None):
    """One record per observed event: top (grouped) attribute and confidence."""
    name = _model_name(model, model_name)
    prepare(model, dataset)
    records = []
    for event in session.events:
        try:
            model.observe(event)
            scores = model.bias_all()
        except Exception as exc:
            raise ReplayError(session.session_id, event.t, exc) from exc
        if groups:
            scores = combine_bias(scores, groups)
        records.append(
            BiasTimelineRecord(
                session.session_id,
                event.t,
                name,
                top_key(scores),
                _confidence(scores),
                getattr(model, "assumption_ok_", None),
                scores.to_dict(),
            )
        )
    return records


# -- benchmark runs -------------------------------------------------------------


def _run_task(task):
    kind, name, prototype, dataset, session, arg = task
    model = copy.deepcopy(prototype)
    if kind == "bench":
        return replay(dataset, session, model, arg, name)
    return bias_timeline(dataset, session, model, arg, name)


def _run(kind, dataset, sessions, models, arg, jobs):
    prototypes = {name: prepare(m, dataset) for name, m in models.items()}
    tasks = [(kind, name, proto, dataset, s, arg) for name, proto in prototypes.items() for s in sessions]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    return [r for chunk in results for r in chunk]


def run_benchmark(dataset, sessions, models, kappas=KAPPAS, jobs=1):
    """Replay every session through every model.

    ``models`` maps a name to an unfitted or fitted model; each (model,
    session) replay works on its own copy. Records come back ordered by
    model, then session, then t, regardless of ``jobs``.
    """
    scored = [s for s in sessions if len(s) >= 2]
    return _run("bench", dataset, scored, models, tuple(sorted(kappas)), jobs)


def run_bias(dataset, sessions, models, groups=None, jobs=1):
    return _run("bias", dataset, sessions, models, groups, jobs)


def summarize(records, kappas=KAPPAS, dataset_name="dataset"):
    """Per-model pooled success rates and mean ranks, plus per-session breakdowns."""
    kappas = tuple(sorted(kappas))
    by_model = {}
    for r in records:
        by_model.setdefault(r.model, []).append(r)
    models = {}
    for name, recs in by_model.items():
        sessions = {}
        for r in recs:
            sessions.setdefault(r.session_id, []).append(r)
        models[name] = {
            "n_predictions": len(recs),
            "success": {str(k): success_rate(recs, k) for k in kappas},
            "mean_rank": mean_rank(recs),
            "sessions": {
                sid: {
                    "n_predictions": len(rs),
                    "success": {str(k): success_rate(rs, k) for k in kappas},
                    "mean_rank": mean_rank(rs),
                }
                for sid, rs in sorted(sessions.items())
            },
        }
    return {"dataset": dataset_name, "kappas": list(kappas), "models": models}


def summary_rows(summary):
    rows = []
    for name, m in summary["models"].items():
        for k in summary["kappas"]:
            rows.append(
                {
                    "dataset": summary["dataset"],
                    "model": name,
                    "kappa": k,
                    "success_rate": m["success"][str(k)],
                    "mean_rank": m["mean_rank"],
                    "n_predictions": m["n_predictions"],
                }
            )
    return rows


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict()) + "\n")


def write_summary(summary, json_path, csv_path):
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    rows = summary_rows(summary)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, ["dataset", "model", "kappa", "success_rate", "mean_rank", "n_predictions"], lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(rows)


def top_share(records, t=None):
    """Fraction of timeline records (optionally at step ``t``) per top attribute."""
    chosen = [r for r in records if t is None or r.t == t]
    if not chosen:
        raise EmptyRecords("no timeline records")
    tops, counts = np.unique([r.top for r in chosen], return_counts=True)
    return {str(k): int(c) / len(chosen) for k, c in zip(tops, counts)}

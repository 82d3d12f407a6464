"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import json
import math
import os
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from conftest import ACCEPTANCE, events
from oracles import cm_enumerate, knn_scores, minmax
from test_ensemble import Fuzzed

from usermodel.cli import main
from usermodel.core import AttributeSchema, load_dataset, load_schema, load_sessions
from usermodel.evaluation import KAPPAS, parse_groups, run_benchmark, run_bias, success_rate, summarize, top_share
from usermodel.models import (
    AdaptiveContextualization,
    AnalyticFocus,
    AttributeDistribution,
    CompetingModels,
    Ensemble,
    HiddenMarkovAttention,
    KNNRelevance,
    RandomRelevance,
    UniformRelevance,
)
from usermodel.models.analytic_focus import decay
from usermodel.stats import chi2_sf, chi_square_assumption, hellinger_distance
from usermodel.synthetic import TaskSpec, gen_dataset, gen_sessions, standard_schema


@contextmanager
def criterion(key):
    """Record PASS/FAIL for ``key``; details are added through the yielded dict."""
    info = {"detail": ""}
    try:
        yield info
    except BaseException:
        ACCEPTANCE[key] = ("FAIL", info["detail"])
        raise
    ACCEPTANCE[key] = ("PASS", info["detail"])


# Shared configuration for criteria 6 and 8: n=2000, two continuous and two
# categorical attributes, 30 sessions of 20 clicks focused on one category.
N = 2000
FOCUS = {"type": "type3"}


@pytest.fixture(scope="module")
def planted():
    ds = gen_dataset(N, standard_schema(), seed=0)
    sessions = gen_sessions(ds, TaskSpec(FOCUS, eta=0.1, length=20, n_sessions=30, seed=1))
    return ds, sessions


def test_criterion_1_knn_oracle():
    with criterion("1 knn == brute-force recount") as info:
        elapsed = 0.0
        mismatches = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(20, 201))
            n_cont = int(rng.integers(0, 3))
            n_cat = int(rng.integers(1, 5 - n_cont))
            schema = [AttributeSchema(f"c{j}", "continuous") for j in range(n_cont)] + [
                AttributeSchema(f"k{j}", "categorical", [f"v{i}" for i in range(int(rng.integers(2, 5)))])
                for j in range(n_cat)
            ]
            ds = gen_dataset(n, schema, seed)
            k = int(rng.integers(1, min(20, n - 1) + 1))
            seen = list(rng.choice(ds.point_ids, int(rng.integers(1, 10))))
            t0 = time.perf_counter()
            got = KNNRelevance(k=k).fit(ds).partial_fit(events(seen)).rank_all().to_dict()
            elapsed += time.perf_counter() - t0
            mismatches += got != knn_scores(ds, k, 1.0, seen)
        info["detail"] = f"20 datasets, {mismatches} mismatches, model time {elapsed:.2f}s"
        assert mismatches == 0
        assert elapsed < 10


def test_criterion_2_cm_oracle():
    with criterion("2 cm == full enumeration") as info:
        worst = 0.0
        for seed in range(12):
            rng = np.random.default_rng(100 + seed)
            kinds = [("continuous", "categorical"), ("continuous", "continuous"), ("categorical", "categorical")][seed % 3]
            schema = [AttributeSchema(f"a{j}", k, [] if k == "continuous" else ["u", "v", "w"]) for j, k in enumerate(kinds)]
            ds = gen_dataset(10, schema, seed)
            seen = list(rng.choice(ds.point_ids, 3))
            m = CompetingModels().fit(ds).partial_fit(events(seen))
            _, rank, bias = cm_enumerate(ds, seen)
            expected = minmax(rank)
            got_rank, got_bias = m.rank_all(), m.bias_all()
            worst = max(worst, max(abs(got_rank[p] - float(expected[p])) for p in ds.point_ids))
            worst = max(worst, max(abs(got_bias[a] - float(bias[a])) for a in ds.names))
        info["detail"] = f"12 toy sets, max abs error {worst:.2e}"
        assert worst <= 1e-9


def test_criterion_3_normalization():
    with criterion("3 posterior / weight normalization") as info:
        ds = gen_dataset(60, standard_schema(n_types=5), seed=3)
        rng = np.random.default_rng(3)
        cm = CompetingModels().fit(ds)
        cm_worst = 0.0
        for t, pid in enumerate(rng.choice(ds.point_ids, 10_000), 1):
            cm.partial_fit(events([pid], start=t))
            cm_worst = max(cm_worst, abs(cm.posterior_.sum() - 1.0))
        hmm_worst = 0.0
        for seed in range(3):
            hmm = HiddenMarkovAttention(random_state=seed).fit(ds)
            for t, pid in enumerate(rng.choice(ds.point_ids, 300), 1):
                hmm.partial_fit(events([pid], start=t))
                hmm_worst = max(hmm_worst, abs(hmm.weights_.sum() - 1.0))
        info["detail"] = f"cm worst {cm_worst:.1e} over 1e4 updates; hmm worst {hmm_worst:.1e} over 900 observes"
        assert cm_worst <= 1e-9
        assert hmm_worst <= 1e-12


def test_criterion_4_closed_forms():
    with criterion("4 closed-form anchors") as info:
        errs = {
            "decay": abs(decay(1.7, 6.0, 6.0) - math.exp(-1) * 1.7),
            "hellinger p=q": abs(hellinger_distance([0.2, 0.3, 0.5], [0.2, 0.3, 0.5])),
            "hellinger disjoint": abs(hellinger_distance([1, 0], [0, 1]) - 1),
            "hellinger .5/.9": abs(hellinger_distance([0.5, 0.5], [0.9, 0.1]) - 0.32492),
            "chi2(1) at 10": abs(chi2_sf(10.0, 1) - 0.001565),
        }
        # AF end to end: one click, queried one persistence later
        af = AnalyticFocus(persistence=6.0).fit(gen_dataset(5, standard_schema(), 0))
        af.observe(events(["p0"], start=1)[0])
        errs["af importance"] = abs(af.importance_of("type:" + af.dataset_.record("p0")["type"], tau=7) - math.exp(-1))
        info["detail"] = ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
        assert errs["decay"] <= 1e-12 and errs["af importance"] <= 1e-12
        assert errs["hellinger p=q"] == 0 and errs["hellinger disjoint"] <= 1e-12
        assert errs["hellinger .5/.9"] <= 1e-4
        assert errs["chi2(1) at 10"] <= 1e-5


def test_criterion_5_ensemble_mean():
    with criterion("5 ensemble == member mean") as info:
        worst = 0.0
        for seed in range(10):
            ds = gen_dataset(80, standard_schema(), seed)
            rng = np.random.default_rng(seed)
            ens = Ensemble([(f"m{i}", Fuzzed(seed=int(s))) for i, s in enumerate(rng.integers(0, 1000, 4))]).fit(ds)
            for t, pid in enumerate(rng.choice(ds.point_ids, 10), 1):
                ens.partial_fit(events([pid], start=t))
                members = list(ens.members_.values())
                worst = max(worst, np.abs(ens.rank_all().values - np.mean([m.rank_all().values for m in members], axis=0)).max())
                worst = max(worst, np.abs(ens.bias_all().values - np.mean([m.bias_all().values for m in members], axis=0)).max())
        # the default roster on real members as well
        ds = gen_dataset(150, standard_schema(), 42)
        ens = Ensemble().fit(ds).partial_fit(events(ds.point_ids[:6]))
        rank_mean = np.mean([ens.members_[n].rank_all().values for n in ens.rank_members_], axis=0)
        bias_mean = np.mean([ens.members_[n].bias_all().values for n in ens.bias_members_], axis=0)
        worst = max(worst, np.abs(ens.rank_all().values - rank_mean).max(), np.abs(ens.bias_all().values - bias_mean).max())
        info["detail"] = f"max abs deviation {worst:.1e}"
        assert worst <= 1e-12


def test_criterion_6_planted_bias(planted):
    ds, sessions = planted
    with criterion("6 planted-bias detection") as info:
        t0 = time.perf_counter()
        models = {
            "ad": AttributeDistribution(),
            "ac": AdaptiveContextualization(),
            "cm": CompetingModels(),
            "hmm": HiddenMarkovAttention(random_state=0),
        }
        shares = {}
        flags = []
        for name, model in models.items():
            records = run_bias(ds, sessions, {name: model})
            shares[name] = top_share(records, 20).get("type", 0.0)
            if name == "ad":
                flags = [r.assumption_ok for r in records if r.t == 20]
        elapsed = time.perf_counter() - t0
        # independent recomputation of the flag from expected counts at t=20
        expected_cells = [20 * np.bincount(ds.codes(a), minlength=len(ds.attribute(a).categories)) / ds.n for a in ("type", "shift")]
        rule = all(chi_square_assumption(e)[0] for e in expected_cells)
        n_false = sum(f is False for f in flags)
        info["detail"] = (
            " ".join(f"{k}={v:.0%}" for k, v in shares.items())
            + f"; AD flag false in {n_false}/{len(flags)} sessions (rule recomputed: {'ok' if rule else 'violated'})"
            + f"; {elapsed:.1f}s"
        )
        assert all(v >= 0.9 for v in shares.values())
        assert elapsed < 120
        assert all(f is (rule) for f in flags)
        assert n_false == 0, "chi-square assumption flag raised (20 clicks over 8 categories)"


def test_criterion_7_mixed_bias():
    with criterion("7 mixed-bias detection") as info:
        ds = gen_dataset(N, standard_schema(), seed=0)
        sessions = gen_sessions(ds, TaskSpec({"type": "type3", "x": (0.2, 0.4)}, eta=0.1, length=20, n_sessions=30, seed=1))
        groups = parse_groups("mixed=type+x,y,shift")
        shares = {}
        for name, model in {"cm": CompetingModels(), "ad": AttributeDistribution()}.items():
            shares[name] = top_share(run_bias(ds, sessions, {name: model}, groups), 20).get("mixed", 0.0)
        info["detail"] = " ".join(f"{k}={v:.0%}" for k, v in shares.items())
        assert all(v >= 0.8 for v in shares.values())


def test_criterion_8_prediction_lift(planted):
    ds, sessions = planted
    with criterion("8 prediction lift") as info:
        baseline = 100 / N
        models = {
            "knn": KNNRelevance(),
            "cm": CompetingModels(),
            "hmm": HiddenMarkovAttention(random_state=0),
            "ens": Ensemble(),
            "control": RandomRelevance(random_state=0),
            "constant": UniformRelevance(),
        }
        records = run_benchmark(ds, sessions, models, kappas=(100,), jobs=min(4, os.cpu_count() or 1))
        rates, counts = {}, {}
        for name in models:
            recs = [r for r in records if r.model == name]
            rates[name] = success_rate(recs, 100)
            counts[name] = len(recs)
        # "constant" ties every point, so its hits depend on id order; reported only
        info["detail"] = " ".join(f"{k}={v:.3f}" for k, v in rates.items()) + f" (n_events={counts['control']})"
        for name in ("knn", "cm", "hmm", "ens"):
            assert rates[name] > 5 * baseline, name
        assert counts["control"] >= 500
        assert abs(rates["control"] - baseline) <= 0.5 * baseline


def test_criterion_9_determinism(tmp_path):
    with criterion("9 determinism and leakage") as info:
        data = tmp_path / "data"
        assert main(["synth", "--n", "400", "--focus", "type=type1", "--n-sessions", "6", "--length", "10", "--out", str(data)]) == 0
        inputs = ["--data", str(data / "dataset.csv"), "--schema", str(data / "schema.json"), "--sessions", str(data / "sessions.csv")]
        outs = []
        for jobs in ("1", "4"):
            out = tmp_path / f"run{jobs}"
            assert main(["bench", *inputs, "--seed", "7", "--jobs", jobs, "--out", str(out)]) == 0
            outs.append((out / "summary.json").read_bytes())
        summary = json.loads(outs[0])
        assert list(summary["models"]) == ["knn", "bnb", "af", "hmm", "cm", "ens"]
        assert outs[0] == outs[1]
        # leakage: the spy in the evaluation tests checks call order step by step
        from test_evaluation import test_rank_is_queried_before_observe

        test_rank_is_queried_before_observe()
        info["detail"] = f"summary.json identical across --jobs 1/4 ({len(outs[0])} bytes); spy ordering ok"


STL = os.environ.get("USERMODEL_STL_DIR")


@pytest.mark.skipif(not STL, reason="set USERMODEL_STL_DIR to a folder with the STL crimes data and logs")
def test_criterion_10_stl_reproduction():
    """Expects schema.json, dataset.csv and one sessions_<task>.csv per task."""
    root = Path(STL)
    with criterion("10 conditional STL reproduction") as info:
        schema = load_schema(root / "schema.json")
        ds = load_dataset(root / "dataset.csv", schema)
        tables = {}
        for path in sorted(root.glob("sessions_*.csv")):
            task = path.stem.removeprefix("sessions_")
            sessions = load_sessions(path, ds)
            models = {"hmm": HiddenMarkovAttention(random_state=0), "cm": CompetingModels()}
            records = run_benchmark(ds, sessions, models, KAPPAS, jobs=min(4, os.cpu_count() or 1))
            tables[task] = summarize(records, KAPPAS, task)
        loc = tables["location"]["models"]
        rates = {m: loc[m]["success"]["100"] for m in ("hmm", "cm")}
        info["detail"] = " ".join(f"{m}@100={v:.2f}" for m, v in rates.items())
        assert all(0.8 <= v <= 1.0 for v in rates.values())


def test_criterion_10_reported_when_skipped():
    if not STL:
        ACCEPTANCE["10 conditional STL reproduction"] = ("SKIP", "no STL data supplied (USERMODEL_STL_DIR unset)")

import math

import numpy as np
import pytest
from conftest import events, random_dataset
from oracles import cm_enumerate, minmax

from usermodel.core import AttributeSchema, validate_dataset
from usermodel.exceptions import TooManyAttributes
from usermodel.models import CompetingModels
from usermodel.synthetic import gen_dataset, standard_schema


def test_prior_over_subsets():
    ds = random_dataset(0, 20, n_cont=2, n_cat=1)
    m = CompetingModels().fit(ds)
    assert len(m.posterior()) == 8
    np.testing.assert_allclose(m.posterior_, 0.125)
    np.testing.assert_allclose(m.bias_all().values, 0.5)
    assert np.all(m.rank_all().values == 0.5)


def test_too_many_attributes():
    ds = random_dataset(0, 5, n_cont=17, n_cat=0)
    with pytest.raises(TooManyAttributes):
        CompetingModels(d_cap=16).fit(ds)


def test_smoothed_category_mass():
    schema = [AttributeSchema("type", "categorical", [f"t{i}" for i in range(8)])]
    ds = validate_dataset([{"point_id": f"p{i}", "type": f"t{i % 8}"} for i in range(16)], schema)
    m = CompetingModels().fit(ds).partial_fit(events(["p0", "p8", "p0"]))
    assert m.attribute_term("type", "p0") == pytest.approx(4 / 11)
    assert m.predictive([], "p3") == pytest.approx(1 / 16)


@pytest.mark.parametrize("seed", range(6))
def test_matches_full_enumeration(seed):
    rng = np.random.default_rng(seed)
    kinds = [("continuous", "categorical"), ("continuous", "continuous"), ("categorical", "categorical")][seed % 3]
    schema = [
        AttributeSchema(f"a{j}", k, [] if k == "continuous" else ["u", "v", "w"]) for j, k in enumerate(kinds)
    ]
    ds = gen_dataset(10, schema, seed)
    seen = list(rng.choice(ds.point_ids, 3))
    m = CompetingModels().fit(ds).partial_fit(events(seen))
    post, rank, bias = cm_enumerate(ds, seen)
    for S, p in m.posterior().items():
        assert p == pytest.approx(float(post[S]), abs=1e-9)
    expected = minmax(rank)
    got = m.rank_all()
    for pid in ds.point_ids:
        assert got[pid] == pytest.approx(float(expected[pid]), abs=1e-9)
    for a in ds.names:
        assert m.bias_all()[a] == pytest.approx(float(bias[a]), abs=1e-9)


def test_unweighted_mode_matches_oracle_sum():
    ds = random_dataset(4, 10, n_cont=1, n_cat=1, n_levels=3)
    seen = list(ds.point_ids[:3])
    m = CompetingModels(unweighted_bma=True).fit(ds).partial_fit(events(seen))
    # unweighted sum = posterior-weighted sum with every weight 1
    raw = np.zeros(ds.n)
    for S in m.posterior():
        raw += np.array([m.predictive(S, p) for p in ds.point_ids])
    expected = minmax(dict(enumerate(raw)))
    np.testing.assert_allclose(m.rank_all().values, [expected[i] for i in range(ds.n)], atol=1e-12)


def test_posterior_normalized_over_fuzzed_updates():
    ds = random_dataset(5, 40, n_cont=2, n_cat=2, n_levels=5)
    m = CompetingModels().fit(ds)
    rng = np.random.default_rng(5)
    worst = 0.0
    for t, pid in enumerate(rng.choice(ds.point_ids, 10_000), 1):
        m.partial_fit(events([pid], start=t))
        worst = max(worst, abs(m.posterior_.sum() - 1))
    assert worst <= 1e-9


def test_uniform_clicks_favor_null_over_single_attribute():
    schema = [AttributeSchema("type", "categorical", [f"t{i}" for i in range(8)])]
    ds = gen_dataset(400, schema, seed=1)
    rng = np.random.default_rng(2)
    m = CompetingModels().fit(ds)
    ratios = []
    for t, pid in enumerate(rng.choice(ds.point_ids, 200), 1):
        m.partial_fit(events([pid], start=t))
        post = m.posterior()
        ratios.append(math.log(post[frozenset()]) - math.log(post[frozenset({"type"})]))
    assert ratios[-1] > 0
    assert ratios[-1] >= ratios[99]


def test_single_category_clicks_find_type():
    ds = gen_dataset(500, standard_schema(), seed=3)
    arson = [p for p in ds.point_ids if ds.record(p)["type"] == "type3"]
    m = CompetingModels().fit(ds).partial_fit(events(arson[:30]))
    mass = sum(p for S, p in m.posterior().items() if "type" in S)
    assert mass > 0.999
    assert m.bias_all()["type"] == pytest.approx(mass, abs=1e-12)


def test_degenerate_posterior_orders_like_that_model():
    ds = random_dataset(6, 30, n_cont=1, n_cat=1)
    m = CompetingModels().fit(ds).partial_fit(events(ds.point_ids[:4]))
    k = 2  # subset {k0}
    m.log_posterior_[:] = -np.inf
    m.log_posterior_[k] = 0.0
    expected = [m.predictive({"k0"}, p) for p in ds.point_ids]
    assert np.argsort(m.rank_all().values, kind="stable").tolist() == np.argsort(expected, kind="stable").tolist()

import numpy as np
import pytest

from usermodel.core import AttributeSchema, InteractionEvent, Session, validate_dataset
from usermodel.synthetic import gen_dataset


def events(point_ids, action="click", start=1):
    return [InteractionEvent(p, start + i, action) for i, p in enumerate(point_ids)]


def session(point_ids, sid="s0"):
    return Session(sid, tuple(events(point_ids)))


def random_dataset(seed, n, n_cont=2, n_cat=1, n_ord=0, n_levels=4):
    schema = (
        [AttributeSchema(f"c{j}", "continuous") for j in range(n_cont)]
        + [AttributeSchema(f"k{j}", "categorical", [f"v{i}" for i in range(n_levels)]) for j in range(n_cat)]
        + [AttributeSchema(f"o{j}", "ordinal", ["lo", "mid", "hi"]) for j in range(n_ord)]
    )
    return gen_dataset(n, schema, seed)


@pytest.fixture
def crimes():
    """Six points: three arsons on the east side, three thefts on the west."""
    schema = [
        AttributeSchema("type", "categorical", ["Arson", "Theft"]),
        AttributeSchema("lon", "continuous"),
    ]
    rows = [
        {"point_id": "a1", "type": "Arson", "lon": 8.0},
        {"point_id": "a2", "type": "Arson", "lon": 9.0},
        {"point_id": "a3", "type": "Arson", "lon": 10.0},
        {"point_id": "t1", "type": "Theft", "lon": 0.0},
        {"point_id": "t2", "type": "Theft", "lon": 1.0},
        {"point_id": "t3", "type": "Theft", "lon": 2.0},
    ]
    return validate_dataset(rows, schema)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance reporting --------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}")

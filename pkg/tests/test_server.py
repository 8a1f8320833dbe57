import json

import pytest

fastapi = pytest.importorskip("fastapi")
from fastapi.testclient import TestClient

from dashbench.drivers import DriverConfig, load_dataset, open_driver
from dashbench.server import create_app
from dashbench.specs import parse_interaction_log

from conftest import FIXTURES

COVID = FIXTURES / "covid"


@pytest.fixture()
def client(tmp_path, covid_db, brush_iface):
    db_file = str(tmp_path / "covid.db")
    cfg = DriverConfig(kind="sqlite", database=db_file)
    driver = open_driver(cfg)
    load_dataset(driver, covid_db, "covid", COVID / "covid.csv")
    driver.shutdown()
    app = create_app(brush_iface, cfg, log_path=tmp_path / "session.jsonl")
    with TestClient(app) as c:
        c.log_path = tmp_path / "session.jsonl"
        yield c


RADIO_EVENT = {
    "relationship": "radio_metric",
    "timestamp": 1610000000000,
    "parameters": {"field": "metric", "equal": "positive_cases"},
}


def test_get_spec(client, brush_iface):
    res = client.get("/spec")
    assert res.status_code == 200
    assert res.json() == brush_iface.to_dict()


def test_post_log_appends(client, brush_iface):
    res = client.post("/log", json=RADIO_EVENT)
    assert res.status_code == 200
    assert res.json() == {"lines": 1}
    res = client.post("/log", json=dict(RADIO_EVENT, timestamp=1610000001000))
    assert res.json() == {"lines": 2}
    lines = client.log_path.read_text().splitlines()
    assert len(lines) == 2
    events = parse_interaction_log("\n".join(lines) + "\n", brush_iface)
    assert events[0].relationship == "radio_metric"


def test_post_log_rejects_invalid(client):
    bad = {"relationship": "ghost", "timestamp": 1, "parameters": {}}
    res = client.post("/log", json=bad)
    assert res.status_code == 422
    assert "ghost" in res.json()["error"]


def test_post_query_executes(client):
    res = client.post("/query", json=RADIO_EVENT)
    assert res.status_code == 200
    body = res.json()
    assert body["timestamp"] == RADIO_EVENT["timestamp"]
    assert [q["node"] for q in body["queries"]] == ["line_graph", "heat_map"]
    for q in body["queries"]:
        assert q["rows"], q["sql"]
        assert q["columns"]


def test_reload_keeps_appending(tmp_path, brush_iface):
    # a new session over an existing log continues the line count; prior
    # lines stay intact (append-only)
    log = tmp_path / "session.jsonl"
    app1 = create_app(brush_iface, None, log_path=log)
    with TestClient(app1) as c1:
        assert c1.post("/log", json=RADIO_EVENT).json() == {"lines": 1}
    app2 = create_app(brush_iface, None, log_path=log)
    with TestClient(app2) as c2:
        res = c2.post("/log", json=dict(RADIO_EVENT, timestamp=1610000002000))
        assert res.json() == {"lines": 2}
    assert len(log.read_text().splitlines()) == 2


def test_post_query_brush_detail_levels(client):
    client.post("/query", json=RADIO_EVENT)
    brush = {
        "relationship": "brushfilter1",
        "timestamp": 1610000005000,
        "parameters": {
            "and": [
                {"field": "longitude", "range": [-79.5, -75.0]},
                {"field": "latitude", "range": [37.9, 39.7]},
            ]
        },
    }
    res = client.post("/query", json=brush)
    assert res.status_code == 200
    body = res.json()
    assert [(q["node"], q["detail_level"]) for q in body["queries"]] == [
        ("line_graph", 0),
        ("line_graph", 1),
        ("heat_map", 0),
        ("heat_map", 1),
    ]

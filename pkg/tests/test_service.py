import pytest
from fastapi.testclient import TestClient

from geolab import __version__
from geolab.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": __version__}


def test_presets_listing(client):
    r = client.get("/presets")
    assert r.status_code == 200
    names = r.json()["presets"]
    assert "boost" in names and "rn-counterexample" in names
    assert names == sorted(names)


def test_run_preset(client):
    r = client.post("/run", json={"preset": "boost"})
    assert r.status_code == 200
    body = r.json()
    assert body["exit_code"] == 0
    assert {a["name"] for a in body["artifacts"]} == {
        "boost_boost.csv",
        "boost_scan.json",
    }


def test_run_inline_scenario_with_seed_override(client):
    sc = {"name": "deg", "task": "degree", "directions": 64}
    r = client.post("/run", json={"scenario": sc, "seed": 7})
    assert r.status_code == 200
    body = r.json()
    assert body["exit_code"] == 0
    assert body["report"]["degree"] == 1


def test_run_verification_failure_maps_to_exit_2(client):
    r = client.post("/run", json={"preset": "rn-counterexample"})
    assert r.status_code == 200
    assert r.json()["exit_code"] == 2


def test_run_requires_exactly_one_source(client):
    assert client.post("/run", json={}).status_code == 422
    both = {"preset": "boost", "scenario": {"name": "x", "task": "degree"}}
    assert client.post("/run", json=both).status_code == 422


def test_run_schema_errors(client):
    assert client.post("/run", json={"preset": "nope"}).status_code == 422
    bad = {"scenario": {"name": "x", "task": "degree", "bogus": 1}}
    assert client.post("/run", json=bad).status_code == 422

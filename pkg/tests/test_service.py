import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from fragmon import __version__
from fragmon.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


@pytest.fixture()
def synth(client, vehicle_source):
    r = client.post("/synth", json={"program": vehicle_source})
    assert r.status_code == 200
    return r.json()


def test_health(client):
    assert client.get("/health").json() == {"status": "ok", "version": __version__}


def test_synth(synth):
    assert len(synth["conditions"]) == 2
    assert synth["file"].startswith("# fragmon-conditions v1")
    assert "VehicleService.weight" in synth["relevant_methods"]


def test_synth_parse_error(client):
    r = client.post("/synth", json={"program": "class A\n"})
    assert r.status_code == 422 and r.json()["error"] == "ParseError"


def test_unknown_field_rejected(client, vehicle_source):
    assert client.post("/synth", json={"program": vehicle_source, "depht": 2}).status_code == 422


def test_monitor_then_reconstruct(client, vehicle_source, synth):
    body = {"program": vehicle_source, "conditions": synth["file"], "seeds": [0, 1, 2],
            "policy": {"kind": "always-on"}}
    m = client.post("/monitor", json=body).json()
    assert m["cshash"] == synth["cshash"] and m["fragment_count"] == 3
    assert [r["seed"] for r in m["runs"]] == [0, 1, 2]
    r = client.post("/reconstruct", json={"fragments": [m["fragments"]], "conditions": synth["file"],
                                          "program": vehicle_source}).json()
    assert r["trace_count"] >= 3 and r["cshash"] == synth["cshash"]


def test_reconstruct_hash_mismatch(client, vehicle_source, synth):
    m = client.post("/monitor", json={"program": vehicle_source, "conditions": synth["file"],
                                      "policy": {"kind": "always-on"}}).json()
    other = synth["file"].replace(synth["cshash"], "0" * 16)
    r = client.post("/reconstruct", json={"fragments": [m["fragments"]], "conditions": other})
    assert r.status_code == 422 and r.json()["error"] == "ConditionSetMismatch"


def test_gen_deterministic(client):
    a = client.post("/gen", json={"rng_seed": 5}).json()
    assert a == client.post("/gen", json={"rng_seed": 5}).json()
    assert client.post("/gen", json={"n_classes": 0}).status_code == 422


def test_eval(client):
    body = {"seed": 42, "runs": 5, "include_artifacts": True}
    a = client.post("/eval", json=body).json()
    assert a == client.post("/eval", json=body).json()
    assert set(a["metrics"]) >= {"precision", "exactness", "coverage", "overhead_proxy"}
    assert "entry S0.main" in a["program"]


def test_eval_policy_validated(client):
    r = client.post("/eval", json={"runs": 2, "policy": {"kind": "sometimes"}})
    assert r.status_code == 422


def test_collector(client, vehicle_source, synth):
    base = {"program": vehicle_source, "conditions": synth["file"], "policy": {"kind": "always-on"}}
    a = client.post("/monitor", json={**base, "installation": "a"}).json()["fragments"]
    b = client.post("/monitor", json={**base, "installation": "b"}).json()["fragments"]
    client.post("/fragments", json={"fragments": a})
    res = client.post("/fragments", json={"fragments": b}).json()
    assert res == {"cshash": synth["cshash"], "accepted": 1, "total": 2, "installations": ["a", "b"]}
    text = client.get(f"/fragments/{synth['cshash']}").text
    assert len(text.splitlines()) == 2
    client.delete("/fragments")
    assert client.get(f"/fragments/{synth['cshash']}").text == ""


def test_collector_empty_upload(client):
    assert client.post("/fragments", json={"fragments": ""}).status_code == 422

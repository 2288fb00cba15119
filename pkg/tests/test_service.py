from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from tagtour.config import PipelineParams, ServiceConfig
from tagtour.pipeline import run_pipeline
from tagtour.service import create_app
from tagtour.spots import FixtureProvider, SpotQuery, export_spots, search_spots
from tagtour.tree import export_tree

from conftest import DATA_DIR


def _config(manifest_name: str, provider_dir, **pipeline_kwargs) -> ServiceConfig:
    return ServiceConfig(
        corpus_path=DATA_DIR / manifest_name,
        pipeline=PipelineParams(**pipeline_kwargs),
        provider_data=provider_dir,
    )


@pytest.fixture(scope="module")
def micro_client(provider_dir):
    app = create_app(_config("micro_manifest.json", provider_dir))
    with TestClient(app) as client:
        yield client


@pytest.fixture(scope="module")
def animal_client(provider_dir):
    app = create_app(_config("animal_manifest.json", provider_dir, hub_min_edges=1))
    with TestClient(app) as client:
        yield client


def _tree_body(client) -> dict:
    resp = client.get("/api/tree")
    assert resp.status_code == 200
    return resp.json()


def _node_by_representative(body: dict, representative: str) -> dict:
    return next(n for n in body["nodes"] if n["representative"] == representative)


# --- tree ---------------------------------------------------------------------

def test_tree_matches_pipeline_export(micro_client, micro_corpus):
    body = _tree_body(micro_client)
    expected = export_tree(run_pipeline(micro_corpus, PipelineParams()).tree)
    assert body["nodes"] == expected["nodes"]
    assert body["params"] == expected["params"]
    roots = [n for n in body["nodes"] if n["role"] == "root"]
    assert len(roots) == 1


def test_tree_responses_are_byte_identical(micro_client):
    first = micro_client.get("/api/tree").content
    second = micro_client.get("/api/tree").content
    assert first == second


def test_tree_initial_view_marks_root_hubs_and_hub_photos(animal_client):
    body = _tree_body(animal_client)
    root = next(n for n in body["nodes"] if n["role"] == "root")
    hubs = [n for n in body["nodes"] if n["role"] == "hub"]
    assert [h["representative"] for h in hubs] == ["cat"]
    view = body["initial_view"]
    assert view["nodes"] == [root["id"]] + [h["id"] for h in hubs]
    assert view["photo_nodes"] == [
        {"node_id": hubs[0]["id"], "photo_id": pn["photo_id"]}
        for pn in hubs[0]["photo_nodes"]
    ]


# --- expansion and search --------------------------------------------------------

def test_children_endpoint_filters_by_appearance(animal_client):
    body = _tree_body(animal_client)
    root = next(n for n in body["nodes"] if n["role"] == "root")
    resp = animal_client.get(f"/api/nodes/{root['id']}/children")
    assert resp.status_code == 200
    # bird (2), fish (2) and the lake cluster (4) fall below the floor of 5
    assert [n["representative"] for n in resp.json()["nodes"]] == ["cat"]


def test_children_of_leaf_is_empty(animal_client):
    body = _tree_body(animal_client)
    leaf = next(n for n in body["nodes"] if not n["children"])
    resp = animal_client.get(f"/api/nodes/{leaf['id']}/children")
    assert resp.json() == {"nodes": []}


def test_children_unknown_node_404(animal_client):
    resp = animal_client.get("/api/nodes/n9999/children")
    assert resp.status_code == 404
    assert resp.json()["code"] == "not_found"


def test_search_nodes_endpoint(micro_client):
    resp = micro_client.get("/api/nodes", params={"query": "lake"})
    assert resp.status_code == 200
    nodes = resp.json()["nodes"]
    assert len(nodes) == 1
    assert "lake" in nodes[0]["members"]
    assert micro_client.get("/api/nodes", params={"query": "zzz"}).json() == {"nodes": []}


def test_search_nodes_requires_query(micro_client):
    resp = micro_client.get("/api/nodes")
    assert resp.status_code == 400
    assert resp.json()["code"] == "validation_error"


# --- selection ---------------------------------------------------------------------

def test_select_node_adds_representative(micro_client):
    body = _tree_body(micro_client)
    lake = _node_by_representative(body, "lake")
    resp = micro_client.post("/api/sessions/sel-1/selection", json={"node_id": lake["id"]})
    assert resp.status_code == 200
    assert "lake" in resp.json()["selected_keywords"]


def test_select_is_idempotent(micro_client):
    body = _tree_body(micro_client)
    root = next(n for n in body["nodes"] if n["role"] == "root")
    first = micro_client.post("/api/sessions/sel-2/selection", json={"node_id": root["id"]}).json()
    second = micro_client.post("/api/sessions/sel-2/selection", json={"node_id": root["id"]}).json()
    assert first == second


def test_select_unknown_node_404(micro_client):
    resp = micro_client.post("/api/sessions/sel-3/selection", json={"node_id": "n9999"})
    assert resp.status_code == 404


def test_select_photo_intersects_with_node_members(animal_client):
    body = _tree_body(animal_client)
    root = next(n for n in body["nodes"] if n["role"] == "root")  # the {animal} key node
    assert root["members"] == ["animal"]
    assert root["photo_nodes"][0]["photo_id"] == "a01"
    resp = animal_client.post(
        "/api/sessions/sel-4/selection",
        json={"photo_id": "a01", "node_id": root["id"]},
    )
    assert resp.status_code == 200
    # a01 carries animal, cat and dog, but only the node's member is added
    assert resp.json()["selected_keywords"] == ["animal"]


def test_select_photo_alone_is_ambiguous_across_nodes(animal_client):
    # a01 decorates both the {animal} root and the {cat, dog} hub
    resp = animal_client.post("/api/sessions/sel-5/selection", json={"photo_id": "a01"})
    assert resp.status_code == 400
    assert "node_id" in resp.json()["message"]


def test_select_photo_alone_with_single_decorating_node(animal_client):
    body = _tree_body(animal_client)
    lake_node = _node_by_representative(body, "lake")
    photo_ids = [pn["photo_id"] for pn in lake_node["photo_nodes"]]
    only_here = next(
        pid
        for pid in photo_ids
        if sum(pid in [p["photo_id"] for p in n["photo_nodes"]] for n in body["nodes"]) == 1
    )
    resp = animal_client.post("/api/sessions/sel-6/selection", json={"photo_id": only_here})
    assert resp.status_code == 200
    assert set(resp.json()["selected_keywords"]) <= {"forest", "lake", "nature"}


def test_select_photo_not_decorating_node_404(animal_client):
    body = _tree_body(animal_client)
    root = next(n for n in body["nodes"] if n["role"] == "root")
    resp = animal_client.post(
        "/api/sessions/sel-7/selection",
        json={"photo_id": "d01", "node_id": root["id"]},
    )
    assert resp.status_code == 404


def test_select_requires_a_target(micro_client):
    resp = micro_client.post("/api/sessions/sel-8/selection", json={})
    assert resp.status_code == 400


def test_deselect_removes_keyword_and_is_idempotent(micro_client):
    body = _tree_body(micro_client)
    lake = _node_by_representative(body, "lake")
    micro_client.post("/api/sessions/sel-9/selection", json={"node_id": lake["id"]})
    resp = micro_client.delete("/api/sessions/sel-9/selection/lake")
    assert resp.status_code == 200
    assert "lake" not in resp.json()["selected_keywords"]
    again = micro_client.delete("/api/sessions/sel-9/selection/lake")
    assert again.status_code == 200
    assert again.json() == resp.json()


def test_concurrent_selects_serialize_per_session(animal_client):
    body = _tree_body(animal_client)
    node_ids = [n["id"] for n in body["nodes"]]

    def select(node_id: str):
        return animal_client.post(
            "/api/sessions/conc-1/selection", json={"node_id": node_id}
        )

    with ThreadPoolExecutor(max_workers=8) as pool:
        responses = list(pool.map(select, node_ids * 3))
    assert all(r.status_code == 200 for r in responses)
    final = select(node_ids[0]).json()
    expected = {n["representative"] for n in body["nodes"]}
    assert set(final["selected_keywords"]) == expected
    assert set(final["selected_node_ids"]) == set(node_ids)


# --- spots -----------------------------------------------------------------------

def test_spots_endpoint_matches_core_pipeline(micro_client, provider_dir):
    body = _tree_body(micro_client)
    lake = _node_by_representative(body, "lake")
    micro_client.post("/api/sessions/spot-1/selection", json={"node_id": lake["id"]})
    resp = micro_client.post(
        "/api/spots", json={"session_id": "spot-1", "region": "Hokkaido"}
    )
    assert resp.status_code == 200
    payload = resp.json()
    assert payload["keywords"] == ["lake"]
    expected = export_spots(
        search_spots(SpotQuery(region="Hokkaido", keywords=("lake",)),
                     FixtureProvider(provider_dir))
    )
    assert payload["spots"] == expected
    assert len(payload["spots"]) == 2


def test_spots_empty_selection_is_a_validation_error(micro_client):
    resp = micro_client.post(
        "/api/spots", json={"session_id": "spot-none", "region": "Hokkaido"}
    )
    assert resp.status_code == 400
    assert resp.json()["code"] == "validation_error"


def test_spots_keyword_override_without_session_state(micro_client):
    resp = micro_client.post(
        "/api/spots",
        json={"session_id": "spot-2", "region": "Hokkaido", "keywords": ["lake"]},
    )
    assert resp.status_code == 200
    assert [s["spot_id"] for s in resp.json()["spots"]] == ["s000", "s001"]


def test_spots_ranking_override_reorders_not_filters(micro_client):
    base = micro_client.post(
        "/api/spots",
        json={"session_id": "spot-3", "region": "Hokkaido", "keywords": ["lake"],
              "ranking_mode": "keyword_relevance"},
    ).json()["spots"]
    by_count = micro_client.post(
        "/api/spots",
        json={"session_id": "spot-3", "region": "Hokkaido", "keywords": ["lake"],
              "ranking_mode": "photo_count"},
    ).json()["spots"]
    assert sorted(s["spot_id"] for s in base) == sorted(s["spot_id"] for s in by_count)
    counts = [s["nearby_count"] for s in by_count]
    assert counts == sorted(counts, reverse=True)


def test_spots_empty_region_rejected(micro_client):
    resp = micro_client.post(
        "/api/spots",
        json={"session_id": "spot-4", "region": "   ", "keywords": ["lake"]},
    )
    assert resp.status_code == 400


def test_spots_provider_failure_maps_to_gateway_error(tmp_path, provider_dir):
    broken = tmp_path / "providers"
    broken.mkdir()
    (broken / "hokkaido.json").write_text("{broken", encoding="utf-8")
    app = create_app(_config("micro_manifest.json", broken))
    with TestClient(app) as client:
        resp = client.post(
            "/api/spots",
            json={"session_id": "x", "region": "Hokkaido", "keywords": ["lake"]},
        )
    assert resp.status_code == 502
    assert resp.json()["code"] == "provider_error"
    assert resp.json()["provider"] == "fixture"


def test_spots_limit_override(micro_client):
    resp = micro_client.post(
        "/api/spots",
        json={"session_id": "spot-5", "region": "Hokkaido",
              "keywords": ["lake"], "limit": 1},
    )
    assert [s["spot_id"] for s in resp.json()["spots"]] == ["s000"]


# --- photos ---------------------------------------------------------------------

def test_photo_endpoint_returns_record_for_remote_uri(micro_client):
    resp = micro_client.get("/api/photos/P1")
    assert resp.status_code == 200
    body = resp.json()
    assert body["photo_id"] == "P1"
    assert body["uri"] == "photos/P1.jpg"
    assert {t["keyword"] for t in body["tags"]} == {"animal", "cat"}


def test_photo_endpoint_unknown_photo(micro_client):
    resp = micro_client.get("/api/photos/requiem")
    assert resp.status_code == 404


def test_photo_endpoint_serves_local_files(tmp_path, provider_dir):
    asset = tmp_path / "pic.jpg"
    asset.write_bytes(b"not really a jpeg")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps([
        {"photo_id": "L1", "uri": str(asset),
         "tags": [{"keyword": "wall", "confidence": 0.9}]}
    ]), encoding="utf-8")
    config = ServiceConfig(corpus_path=manifest, provider_data=provider_dir)
    with TestClient(create_app(config)) as client:
        resp = client.get("/api/photos/L1")
    assert resp.status_code == 200
    assert resp.content == b"not really a jpeg"


# --- read-only guarantees ----------------------------------------------------------

def test_read_endpoints_are_side_effect_free(animal_client):
    body = _tree_body(animal_client)
    root = next(n for n in body["nodes"] if n["role"] == "root")
    urls = [
        "/api/tree",
        f"/api/nodes/{root['id']}/children",
        "/api/nodes?query=cat",
        "/api/photos/a01",
    ]
    for url in urls:
        assert animal_client.get(url).content == animal_client.get(url).content

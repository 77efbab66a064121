"""HTTP service tests: registration, sessions, mutations, assets."""

import base64
import io
import json
import threading
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient
from PIL import Image

from flexdoc.bundle import parse_document, serialize_solution
from flexdoc.engine import solve
from flexdoc.model import PreferenceState, Viewport
from flexdoc.service import ServiceConfig, create_app

FIXTURES = Path(__file__).parent / "fixtures" / "news"

DESKTOP = {"width": 1280.0, "height": 800.0}
TABLET = {"width": 834.0, "height": 1112.0}
PHONE = {"width": 390.0, "height": 844.0}


def news_bundle(with_data: bool = True) -> dict:
    bundle = json.loads((FIXTURES / "doc.json").read_text())
    if with_data:
        for name in ("hero", "chart"):
            raw = (FIXTURES / "img" / f"{name}.png").read_bytes()
            entry = bundle["assets"][f"img/{name}.png"]
            entry["data"] = base64.b64encode(raw).decode("ascii")
    return bundle


@pytest.fixture()
def client():
    with TestClient(create_app(ServiceConfig())) as c:
        yield c


def register(client, bundle=None) -> str:
    response = client.post("/documents", json=bundle or news_bundle())
    assert response.status_code == 201
    return response.json()["document_id"]


def open_session(client, viewport=DESKTOP, bundle=None) -> dict:
    doc_id = register(client, bundle)
    response = client.post("/sessions",
                           json={"document_id": doc_id, "viewport": viewport})
    assert response.status_code == 201
    return response.json()


class TestDocuments:
    def test_valid_fixture_registers(self, client):
        response = client.post("/documents", json=news_bundle())
        assert response.status_code == 201
        doc_id = response.json()["document_id"]
        assert len(doc_id) == 64 and int(doc_id, 16) >= 0

    def test_duplicate_upload_is_idempotent(self, client):
        first = client.post("/documents", json=news_bundle()).json()
        second = client.post("/documents", json=news_bundle()).json()
        assert first["document_id"] == second["document_id"]

    def test_inline_data_changes_the_id(self, client):
        with_data = register(client, news_bundle(with_data=True))
        without = register(client, news_bundle(with_data=False))
        assert with_data != without

    def test_invalid_bundle_gets_diagnostics(self, client):
        bundle = news_bundle(with_data=False)
        bundle["templates"][0]["rank"] = bundle["templates"][1]["rank"]
        response = client.post("/documents", json=bundle)
        assert response.status_code == 422
        diagnostics = response.json()["diagnostics"]
        assert diagnostics
        assert all({"code", "path", "message"} <= set(d) for d in diagnostics)

    def test_non_object_bundle_rejected(self, client):
        response = client.post("/documents", json=["not", "a", "bundle"])
        assert response.status_code == 422
        assert response.json()["diagnostics"]


class TestSessions:
    def test_create_returns_revision_one(self, client):
        session = open_session(client)
        assert session["revision"] == 1
        assert session["solution"]["template_id"] == "three-col"

    def test_unknown_document_404(self, client):
        response = client.post(
            "/sessions", json={"document_id": "0" * 64, "viewport": DESKTOP})
        assert response.status_code == 404

    def test_zero_viewport_422(self, client):
        doc_id = register(client)
        response = client.post("/sessions", json={
            "document_id": doc_id,
            "viewport": {"width": 0.0, "height": 800.0}})
        assert response.status_code == 422

    def test_solution_matches_in_process_solve(self, client):
        session = open_session(client)
        document = parse_document(news_bundle())
        direct = solve(document, Viewport(1280.0, 800.0), PreferenceState())
        assert session["solution"] == json.loads(serialize_solution(direct))


class TestMutations:
    def test_viewport_change_adapts_template(self, client):
        session = open_session(client)
        sid = session["session_id"]
        response = client.put(f"/sessions/{sid}/viewport", json=PHONE)
        assert response.status_code == 200
        body = response.json()
        assert body["revision"] == 2
        assert body["solution"]["template_id"] == "one-col"

    def test_stale_expected_revision_409(self, client):
        session = open_session(client)
        sid = session["session_id"]
        client.put(f"/sessions/{sid}/viewport", json=PHONE)
        response = client.put(f"/sessions/{sid}/viewport", json=TABLET,
                              headers={"Expected-Revision": "1"})
        assert response.status_code == 409
        assert response.json()["error"] == "stale-revision"
        assert response.json()["revision"] == 2
        current = client.get(f"/sessions/{sid}/solution").json()
        assert current["revision"] == 2
        assert current["solution"]["template_id"] == "one-col"

    def test_matching_expected_revision_accepted(self, client):
        sid = open_session(client)["session_id"]
        response = client.put(f"/sessions/{sid}/viewport", json=PHONE,
                              headers={"Expected-Revision": "1"})
        assert response.status_code == 200
        assert response.json()["revision"] == 2

    def test_malformed_expected_revision_422(self, client):
        sid = open_session(client)["session_id"]
        response = client.put(f"/sessions/{sid}/viewport", json=PHONE,
                              headers={"Expected-Revision": "soon"})
        assert response.status_code == 422

    def test_unknown_session_404(self, client):
        response = client.put("/sessions/nope/viewport", json=PHONE)
        assert response.status_code == 404
        assert client.get("/sessions/nope/solution").status_code == 404

    def test_three_mutations_reach_revision_four(self, client):
        sid = open_session(client)["session_id"]
        client.put(f"/sessions/{sid}/viewport", json=TABLET)
        client.put(f"/sessions/{sid}/viewport", json=PHONE)
        client.post(f"/sessions/{sid}/interactions",
                    json={"kind": "zoom-out", "element_id": "lede"})
        current = client.get(f"/sessions/{sid}/solution").json()
        assert current["revision"] == 4

    def test_preferences_slider_matches_direct_solve(self, client):
        sid = open_session(client)["session_id"]
        response = client.put(f"/sessions/{sid}/preferences",
                              json={"sliders": {"image": 1.0}})
        assert response.status_code == 200
        document = parse_document(news_bundle())
        direct = solve(document, Viewport(1280.0, 800.0),
                       PreferenceState(sliders={"image": 1.0}))
        assert response.json()["solution"] == json.loads(
            serialize_solution(direct))

    def test_preferences_merge_keeps_unnamed_fields(self, client):
        sid = open_session(client)["session_id"]
        client.put(f"/sessions/{sid}/preferences",
                   json={"sliders": {"image": 1.0}})
        response = client.put(f"/sessions/{sid}/preferences",
                              json={"no_scroll": True})
        document = parse_document(news_bundle())
        direct = solve(document, Viewport(1280.0, 800.0),
                       PreferenceState(sliders={"image": 1.0},
                                       no_scroll=True))
        assert response.json()["solution"] == json.loads(
            serialize_solution(direct))

    def test_preferences_out_of_range_slider_422(self, client):
        sid = open_session(client)["session_id"]
        response = client.put(f"/sessions/{sid}/preferences",
                              json={"sliders": {"image": 1.5}})
        assert response.status_code == 422

    def test_preferences_unknown_template_422(self, client):
        sid = open_session(client)["session_id"]
        response = client.put(f"/sessions/{sid}/preferences",
                              json={"forced_template": "grid-nine"})
        assert response.status_code == 422

    def test_unknown_interaction_kind_422(self, client):
        sid = open_session(client)["session_id"]
        response = client.post(f"/sessions/{sid}/interactions",
                               json={"kind": "teleport"})
        assert response.status_code == 422

    def test_interaction_unknown_element_422(self, client):
        sid = open_session(client)["session_id"]
        response = client.post(f"/sessions/{sid}/interactions",
                               json={"kind": "zoom-in", "element_id": "ufo"})
        assert response.status_code == 422

    def test_switch_template_takes_effect(self, client):
        sid = open_session(client)["session_id"]
        response = client.post(f"/sessions/{sid}/interactions",
                               json={"kind": "switch-template",
                                     "template_id": "two-col"})
        assert response.status_code == 200
        assert response.json()["solution"]["template_id"] == "two-col"
        assert response.json()["solution"]["flags"] == []


class TestPins:
    def _placement(self, body, element_id):
        for item in body["solution"]["placements"]:
            if item["element_id"] == element_id:
                return item
        raise AssertionError(f"no placement for {element_id}")

    def test_pin_survives_viewport_change(self, client):
        session = open_session(client, viewport=TABLET)
        sid = session["session_id"]
        pinned = client.post(f"/sessions/{sid}/interactions",
                             json={"kind": "pin", "element_id": "chart"})
        assert pinned.status_code == 200
        before = self._placement(pinned.json(), "chart")
        resized = client.put(f"/sessions/{sid}/viewport", json=DESKTOP)
        assert resized.status_code == 200
        after = self._placement(resized.json(), "chart")
        for key in ("x", "y", "w", "h"):
            assert after[key] == before[key]

    def test_switch_to_template_that_cannot_fit_pin_409(self, client):
        bundle = news_bundle()
        for element in bundle["elements"]:
            if element["id"] == "chart":
                element["pinned_geometry"] = {"x": 0.0, "y": 50.0,
                                              "w": 300.0, "h": 200.0}
        session = open_session(client, bundle=bundle)
        sid = session["session_id"]
        assert session["solution"]["template_id"] == "three-col"
        response = client.post(f"/sessions/{sid}/interactions",
                               json={"kind": "switch-template",
                                     "template_id": "one-col"})
        assert response.status_code == 409
        body = response.json()
        assert body["error"] == "infeasible"
        assert "relaxed:template" in body["relaxation"]
        current = client.get(f"/sessions/{sid}/solution").json()
        assert current["revision"] == 1
        assert current["solution"]["template_id"] == "three-col"

    def test_globally_infeasible_mutation_409_keeps_session(self, client):
        session = open_session(client)
        sid = session["session_id"]
        pinned = client.post(f"/sessions/{sid}/interactions",
                             json={"kind": "pin", "element_id": "chart"})
        chart = self._placement(pinned.json(), "chart")
        assert chart["x"] + chart["w"] > 200.0
        response = client.put(f"/sessions/{sid}/viewport",
                              json={"width": 200.0, "height": 800.0})
        assert response.status_code == 409
        assert response.json()["error"] == "infeasible"
        current = client.get(f"/sessions/{sid}/solution").json()
        assert current["revision"] == 2
        assert self._placement(current, "chart") == chart


class TestAssets:
    def test_image_assets_match_solved_geometry(self, client):
        session = open_session(client)
        assets = session["assets"]
        assert set(assets) == {"hero", "chart"}
        placements = {p["element_id"]: p
                      for p in session["solution"]["placements"]}
        for element_id, asset_hash in assets.items():
            response = client.get(f"/assets/{asset_hash}")
            assert response.status_code == 200
            assert response.headers["content-type"] == "image/png"
            assert "immutable" in response.headers["cache-control"]
            image = Image.open(io.BytesIO(response.content))
            placement = placements[element_id]
            assert image.size == (round(placement["w"]),
                                  round(placement["h"]))

    def test_second_fetch_serves_identical_bytes(self, client):
        session = open_session(client)
        asset_hash = session["assets"]["chart"]
        first = client.get(f"/assets/{asset_hash}").content
        second = client.get(f"/assets/{asset_hash}").content
        assert first == second

    def test_unknown_asset_404(self, client):
        assert client.get("/assets/" + "f" * 64).status_code == 404

    def test_no_inline_data_no_asset_annotations(self, client):
        session = open_session(client, bundle=news_bundle(with_data=False))
        assert session["assets"] == {}


class TestLifecycle:
    def test_idle_sessions_expire(self):
        config = ServiceConfig(session_ttl_s=0.02)
        with TestClient(create_app(config)) as client:
            sid = open_session(client)["session_id"]
            time.sleep(0.06)
            assert client.get(f"/sessions/{sid}/solution").status_code == 404

    def test_conflicting_mutations_one_wins(self, client):
        sid = open_session(client)["session_id"]
        statuses = []

        def mutate(viewport):
            response = client.put(f"/sessions/{sid}/viewport", json=viewport,
                                  headers={"Expected-Revision": "1"})
            statuses.append(response.status_code)

        threads = [threading.Thread(target=mutate, args=(vp,))
                   for vp in (PHONE, TABLET)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(statuses) == [200, 409]

"""HTTP endpoints for the hand-survey service."""

from __future__ import annotations

from fastapi.testclient import TestClient

from imagecensus.nsfw import Shortlist, ShortlistClass
from imagecensus.records import ImageKey
from imagecensus.survey import Survey, build_queue
from imagecensus.survey_http import create_app

WID = "n02000001"


def make_survey(n: int = 3, quorum: int = 3) -> Survey:
    classes = (
        ShortlistClass(
            wordnet_id=WID,
            label="label one",
            mean_gender=0.2,
            mean_age=25.0,
            mean_nsfw_train=0.9,
        ),
    )
    images = tuple(
        ImageKey(wordnet_id=WID, split="train", file_name=f"a{i}.JPEG")
        for i in range(n)
    )
    return Survey(
        build_queue(Shortlist(cluster_id=0, classes=classes, images=images)),
        quorum=quorum,
    )


def make_client(survey: Survey | None = None, **kwargs) -> TestClient:
    return TestClient(create_app(survey or make_survey(), **kwargs))


class TestQueueNext:
    def test_first_item(self):
        client = make_client()
        body = client.get("/api/queue/next", params={"annotator": "p"}).json()
        assert body["item"]["item_id"] == f"{WID}/train/a0.JPEG"
        assert body["item"]["status"] == "open"
        assert body["item"]["class_label"] == "label one"

    def test_exhausted_annotator_gets_null(self):
        survey = make_survey(n=1)
        client = make_client(survey)
        client.post(
            "/api/labels",
            json={"annotator": "p", "item_id": f"{WID}/train/a0.JPEG", "category": "upskirt"},
        )
        assert client.get("/api/queue/next", params={"annotator": "p"}).json() == {
            "item": None
        }

    def test_blank_annotator_rejected(self):
        assert make_client().get("/api/queue/next", params={"annotator": ""}).status_code == 422


class TestLabels:
    def test_accepted_label_reports_status(self):
        client = make_client()
        response = client.post(
            "/api/labels",
            json={"annotator": "p", "item_id": f"{WID}/train/a0.JPEG", "category": "upskirt"},
        )
        assert response.status_code == 200
        assert response.json() == {"item_id": f"{WID}/train/a0.JPEG", "status": "open"}

    def test_quorum_closure_visible_in_response(self):
        client = make_client(make_survey(quorum=1))
        body = client.post(
            "/api/labels",
            json={
                "annotator": "p",
                "item_id": f"{WID}/train/a0.JPEG",
                "category": "beach_voyeur",
            },
        ).json()
        assert body["status"] == "consensus"

    def test_unknown_item_404(self):
        response = make_client().post(
            "/api/labels",
            json={"annotator": "p", "item_id": "n0/train/x", "category": "upskirt"},
        )
        assert response.status_code == 404

    def test_closed_item_409(self):
        client = make_client(make_survey(quorum=1))
        payload = {
            "annotator": "p",
            "item_id": f"{WID}/train/a0.JPEG",
            "category": "upskirt",
        }
        client.post("/api/labels", json=payload)
        assert client.post("/api/labels", json=payload).status_code == 409

    def test_bad_category_400(self):
        response = make_client().post(
            "/api/labels",
            json={"annotator": "p", "item_id": f"{WID}/train/a0.JPEG", "category": "nope"},
        )
        assert response.status_code == 400

    def test_missing_field_422(self):
        response = make_client().post(
            "/api/labels", json={"annotator": "p", "category": "upskirt"}
        )
        assert response.status_code == 422


class TestProgressAndConsensus:
    def test_progress_counts(self):
        survey = make_survey(quorum=1)
        client = make_client(survey)
        client.post(
            "/api/labels",
            json={
                "annotator": "p",
                "item_id": f"{WID}/train/a0.JPEG",
                "category": "upskirt",
            },
        )
        body = client.get("/api/progress").json()
        assert body["items"] == {"total": 3, "open": 2, "consensus": 1, "exhausted": 0}
        assert body["annotators"] == {"p": 1}
        assert body["consensus_by_category"]["upskirt"] == 1

    def test_consensus_records(self):
        survey = make_survey(quorum=2)
        client = make_client(survey)
        for annotator in ("p", "q"):
            client.post(
                "/api/labels",
                json={
                    "annotator": annotator,
                    "item_id": f"{WID}/train/a1.JPEG",
                    "category": "beach_voyeur",
                },
            )
        assert client.get("/api/consensus").json() == {
            "records": [
                {
                    "item_id": f"{WID}/train/a1.JPEG",
                    "category": "beach_voyeur",
                    "n_annotators": 2,
                }
            ]
        }


class TestExport:
    def test_csv_content_type_and_body(self):
        survey = make_survey(quorum=1)
        client = make_client(survey)
        client.post(
            "/api/labels",
            json={
                "annotator": "p",
                "item_id": f"{WID}/train/a0.JPEG",
                "category": "upskirt",
            },
        )
        response = client.get("/api/export.csv")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/csv")
        lines = response.text.splitlines()
        assert lines[0] == "wordnet_id,label,mean_nsfw_train,category,file_names"
        assert lines[1] == f"{WID},label one,0.9,upskirt,a0.JPEG"


class TestImages:
    def test_serves_bytes_from_root(self, tmp_path):
        image = tmp_path / "train" / WID / "a0.JPEG"
        image.parent.mkdir(parents=True)
        image.write_bytes(b"\xff\xd8fakejpeg")
        client = make_client(image_root=tmp_path)
        response = client.get(f"/api/items/{WID}/train/a0.JPEG/image")
        assert response.status_code == 200
        assert response.content == b"\xff\xd8fakejpeg"
        assert response.headers["content-type"] == "image/jpeg"

    def test_unknown_item_404(self):
        client = make_client(image_root=".")
        assert client.get("/api/items/n0/train/x/image").status_code == 404

    def test_no_root_configured_404(self):
        client = make_client()
        assert client.get(f"/api/items/{WID}/train/a0.JPEG/image").status_code == 404

    def test_missing_file_404(self, tmp_path):
        client = make_client(image_root=tmp_path)
        assert client.get(f"/api/items/{WID}/train/a0.JPEG/image").status_code == 404

    def test_traversal_refused(self, tmp_path):
        secret = tmp_path / "secret.txt"
        secret.write_text("keep out")
        root = tmp_path / "root"
        (root / "train" / WID).mkdir(parents=True)
        classes = (
            ShortlistClass(
                wordnet_id=WID,
                label="x",
                mean_gender=0.2,
                mean_age=25.0,
                mean_nsfw_train=0.9,
            ),
        )
        sneaky = ImageKey(
            wordnet_id=WID, split="train", file_name="../../../secret.txt"
        )
        survey = Survey(
            build_queue(Shortlist(cluster_id=0, classes=classes, images=(sneaky,)))
        )
        client = make_client(survey, image_root=root)
        # dots stay encoded so the client cannot collapse them before routing
        encoded = f"{WID}/train/%2E%2E%2F%2E%2E%2F%2E%2E%2Fsecret.txt"
        response = client.get(f"/api/items/{encoded}/image")
        assert response.status_code == 403


class TestStatic:
    def test_ui_served_when_configured(self, tmp_path):
        (tmp_path / "index.html").write_text("<!doctype html><p>review ui</p>")
        client = make_client(static_dir=tmp_path)
        response = client.get("/")
        assert response.status_code == 200
        assert "review ui" in response.text

    def test_api_wins_over_static_mount(self, tmp_path):
        (tmp_path / "index.html").write_text("ui")
        client = make_client(static_dir=tmp_path)
        assert "items" in client.get("/api/progress").json()

"""HTTP face of the hand-survey: queue, labels, progress, export, images.

All responses are JSON except the CSV export and the image bytes.  Image
serving is confined to the configured root directory; any resolved path
escaping it is refused.
"""

from __future__ import annotations

import datetime
import logging
import mimetypes
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import ItemClosed, UnknownItem
from .survey import Survey, SurveyItem, export_survey

log = logging.getLogger(__name__)


class LabelSubmission(BaseModel):
    annotator: str
    item_id: str
    category: str


def _item_payload(item: SurveyItem) -> dict:
    return {
        "item_id": item.item_id,
        "wordnet_id": item.image.wordnet_id,
        "split": item.image.split,
        "file_name": item.image.file_name,
        "class_label": item.class_label,
        "mean_nsfw_train": item.mean_nsfw_train,
        "status": item.status,
    }


def _utc_now() -> str:
    return (
        datetime.datetime.now(datetime.timezone.utc)
        .isoformat(timespec="seconds")
        .replace("+00:00", "Z")
    )


def create_app(
    survey: Survey,
    image_root: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="hand-survey service", docs_url=None, redoc_url=None)
    root = Path(image_root).resolve() if image_root is not None else None

    @app.get("/api/queue/next")
    def queue_next(annotator: str = Query(..., min_length=1)) -> dict:
        item = survey.next_item(annotator)
        return {"item": _item_payload(item) if item is not None else None}

    @app.post("/api/labels")
    def post_label(body: LabelSubmission) -> dict:
        try:
            item = survey.submit_label(
                body.annotator, body.item_id, body.category, timestamp=_utc_now()
            )
        except UnknownItem as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except ItemClosed as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"item_id": item.item_id, "status": item.status}

    @app.get("/api/progress")
    def progress() -> dict:
        return survey.progress()

    @app.get("/api/consensus")
    def consensus() -> dict:
        return {
            "records": [
                {
                    "item_id": r.item_id,
                    "category": r.category,
                    "n_annotators": r.n_annotators,
                }
                for r in survey.consensus_records()
            ]
        }

    @app.get("/api/export.csv")
    def export() -> PlainTextResponse:
        items = {item.item_id: item for item in survey.items()}
        text = export_survey(survey.consensus_records(), items)
        return PlainTextResponse(text, media_type="text/csv; charset=utf-8")

    @app.get("/api/items/{item_id:path}/image")
    def item_image(item_id: str) -> FileResponse:
        try:
            item = survey.get_item(item_id)
        except UnknownItem as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        if root is None:
            raise HTTPException(status_code=404, detail="no image root configured")
        candidate = (
            root / item.image.split / item.image.wordnet_id / item.image.file_name
        ).resolve()
        if not candidate.is_relative_to(root):
            raise HTTPException(status_code=403, detail="path escapes image root")
        if not candidate.is_file():
            raise HTTPException(status_code=404, detail="image not found")
        media_type = mimetypes.guess_type(candidate.name)[0] or "application/octet-stream"
        return FileResponse(candidate, media_type=media_type)

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
